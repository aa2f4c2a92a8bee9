//! Dispersion symbols `iψ(k)`, `ψ(k) = Σ_m α_m k^{r_m}`, as diagonal Fourier
//! multipliers, together with the nonresonance check over parameter boxes.
//!
//! Orders are restricted to odd positive integers, which makes `ψ` odd in `k`
//! and keeps the propagator real-preserving.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::FourierField;

/// Guard on `|1 - e^{iψT}|` below which the inverse factor is reported as singular.
pub const SINGULARITY_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolTerm {
    pub coefficient: f64,
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, u32)>", into = "Vec<(f64, u32)>")]
pub struct LinearSymbol {
    terms: Vec<SymbolTerm>,
}

impl TryFrom<Vec<(f64, u32)>> for LinearSymbol {
    type Error = Error;

    fn try_from(pairs: Vec<(f64, u32)>) -> Result<Self> {
        Self::new(pairs)
    }
}

impl From<LinearSymbol> for Vec<(f64, u32)> {
    fn from(s: LinearSymbol) -> Self {
        s.terms.iter().map(|t| (t.coefficient, t.order)).collect()
    }
}

const TWO_PI_HI: f64 = 6.283185307179586;
const TWO_PI_LO: f64 = 2.4492935982947064e-16;

/// `a·t` reduced modulo `2π` to roughly `[-π, π]`.
///
/// The product is split exactly with an fma and `2π` is carried in two
/// parts, so the result stays accurate when `a·t` is of order `10^{15}`.
pub fn reduced_angle(a: f64, t: f64) -> f64 {
    let hi = a * t;
    if hi.abs() <= std::f64::consts::PI {
        return hi;
    }
    let lo = a.mul_add(t, -hi);
    let n = (hi / TWO_PI_HI).round();
    let p1 = n * TWO_PI_HI;
    let e1 = n.mul_add(TWO_PI_HI, -p1);
    ((hi - p1) - e1) + (lo - n * TWO_PI_LO)
}

/// `k^r` in exact integer arithmetic.
pub(crate) fn int_pow(k: i64, r: u32) -> i128 {
    (k as i128).pow(r)
}

impl LinearSymbol {
    /// Terms as `(α_m, r_m)` pairs, highest order first.
    pub fn new(pairs: impl IntoIterator<Item = (f64, u32)>) -> Result<Self> {
        let terms: Vec<SymbolTerm> = pairs
            .into_iter()
            .map(|(coefficient, order)| SymbolTerm { coefficient, order })
            .collect();
        if terms.is_empty() {
            return Err(Error::InvalidSymbol("a symbol needs at least one term".into()));
        }
        for t in &terms {
            if t.order % 2 == 0 {
                return Err(Error::InvalidSymbol(format!(
                    "order {} is not an odd positive integer",
                    t.order
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidSymbol("non-finite coefficient".into()));
            }
        }
        if terms.windows(2).any(|w| w[0].order <= w[1].order) {
            return Err(Error::InvalidSymbol("orders must be strictly decreasing".into()));
        }
        if terms[0].coefficient == 0.0 {
            return Err(Error::InvalidSymbol("leading coefficient is zero".into()));
        }
        Ok(Self { terms })
    }

    /// Parses a JSON list of `[alpha, r]` pairs.
    pub fn from_json_pairs(text: &str) -> Result<Self> {
        let raw: Vec<(f64, f64)> = serde_json::from_str(text)?;
        let pairs = raw
            .into_iter()
            .map(|(a, r)| {
                if r.fract() != 0.0 || r < 1.0 || r > 15.0 {
                    Err(Error::InvalidSymbol(format!("unsupported order {r}")))
                } else {
                    Ok((a, r as u32))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    pub fn terms(&self) -> &[SymbolTerm] {
        &self.terms
    }

    pub fn leading_order(&self) -> u32 {
        self.terms[0].order
    }

    pub fn orders(&self) -> Vec<u32> {
        self.terms.iter().map(|t| t.order).collect()
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coefficient).collect()
    }

    /// Coefficient of the first-order term, zero when absent.
    pub fn first_order_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.order == 1)
            .map_or(0.0, |t| t.coefficient)
    }

    /// Returns a copy with the first-order coefficient replaced (the term is
    /// added or dropped as needed).
    pub fn with_first_order(&self, coefficient: f64) -> Self {
        let mut terms: Vec<SymbolTerm> = self.terms.iter().copied().filter(|t| t.order != 1).collect();
        if coefficient != 0.0 || terms.is_empty() {
            terms.push(SymbolTerm {
                coefficient,
                order: 1,
            });
        }
        Self { terms }
    }

    /// `ψ(k)`; the symbol itself is `iψ(k)`.
    pub fn value(&self, k: i64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * int_pow(k, t.order) as f64)
            .sum()
    }

    /// `e^{iψ(k)t}`.
    pub fn propagator_multiplier(&self, t: f64, k: i64) -> Complex64 {
        let (s, c) = reduced_angle(self.value(k), t).sin_cos();
        Complex64::new(c, s)
    }

    /// `1 - e^{iψ(k)T}` written as `2 sin²(θ/2) - i sin θ` to keep precision near
    /// resonance.
    pub fn small_divisor(&self, period: f64, k: i64) -> Complex64 {
        let theta = reduced_angle(self.value(k), period);
        let h = (0.5 * theta).sin();
        Complex64::new(2.0 * h * h, -theta.sin())
    }

    /// `1 / (1 - e^{iψ(k)T})`.
    pub fn inverse_factor_multiplier(&self, period: f64, k: i64) -> Result<Complex64> {
        let d = self.small_divisor(period, k);
        let gap = d.norm();
        if !(gap >= SINGULARITY_GUARD) {
            return Err(Error::Resonance { k, gap });
        }
        Ok(d.inv())
    }

    /// Closed-form magnitude `(1/√2)(1 - cos ψT)^{-1/2}`.
    pub fn inverse_factor_magnitude(&self, period: f64, k: i64) -> f64 {
        let theta = reduced_angle(self.value(k), period);
        let one_minus_cos = 2.0 * (0.5 * theta).sin().powi(2);
        1.0 / (2f64.sqrt() * one_minus_cos.sqrt())
    }

    /// `S_L(t) f`.
    pub fn apply_linear(&self, t: f64, f: &FourierField) -> FourierField {
        f.map_positive(|k, c| c * self.propagator_multiplier(t, k))
    }

    /// `(I - S_L(T)) f`.
    pub fn apply_one_minus_linear(&self, period: f64, f: &FourierField) -> FourierField {
        f.map_positive(|k, c| c * self.small_divisor(period, k))
    }

    /// `(I - S_L(T))^{-1} f`; fails on the first resonant mode.
    pub fn apply_inverse_factor(&self, period: f64, f: &FourierField) -> Result<FourierField> {
        f.try_map_positive(|k, c| Ok(c * self.inverse_factor_multiplier(period, k)?))
    }

    /// The same symbol with every coefficient negated (time reversal).
    pub fn negated(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| SymbolTerm {
                    coefficient: -t.coefficient,
                    order: t.order,
                })
                .collect(),
        }
    }
}

/// Closed parameter interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterBox {
    pub lo: f64,
    pub hi: f64,
}

impl ParameterBox {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    /// Symmetric box `[-r, r]`.
    pub fn symmetric(r: f64) -> Self {
        Self { lo: -r, hi: r }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Smallest box containing both `self` and `x`.
    pub fn hull_with(&self, x: f64) -> Self {
        Self {
            lo: self.lo.min(x),
            hi: self.hi.max(x),
        }
    }

    fn sup_abs(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    fn inf_abs(&self) -> f64 {
        if self.lo <= 0.0 && 0.0 <= self.hi {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }
}

/// Orders plus one parameter box per order: the family `{ψ_α : α ∈ Z}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolFamily {
    pub orders: Vec<u32>,
    pub boxes: Vec<ParameterBox>,
}

impl SymbolFamily {
    pub fn new(orders: Vec<u32>, boxes: Vec<ParameterBox>) -> Result<Self> {
        if orders.is_empty() || orders.len() != boxes.len() {
            return Err(Error::InvalidSymbol("need one box per order".into()));
        }
        if orders.windows(2).any(|w| w[0] <= w[1]) || orders.iter().any(|r| r % 2 == 0) {
            return Err(Error::InvalidSymbol(
                "orders must be odd and strictly decreasing".into(),
            ));
        }
        for (i, b) in boxes.iter().enumerate() {
            if !b.lo.is_finite() || !b.hi.is_finite() {
                return Err(Error::UnboundedBox { index: i });
            }
            if b.lo > b.hi {
                return Err(Error::InvalidSymbol(format!("box {i} is empty")));
            }
        }
        Ok(Self { orders, boxes })
    }

    /// Point boxes at the coefficients of a concrete symbol.
    pub fn from_symbol(symbol: &LinearSymbol) -> Self {
        Self {
            orders: symbol.orders(),
            boxes: symbol
                .coefficients()
                .into_iter()
                .map(ParameterBox::point)
                .collect(),
        }
    }

    pub fn contains(&self, symbol: &LinearSymbol) -> bool {
        symbol.orders() == self.orders
            && symbol
                .coefficients()
                .iter()
                .zip(&self.boxes)
                .all(|(a, b)| b.contains(*a))
    }

    /// Range of `Σ_m α_m k^{r_m}` over the box, `k >= 1`.
    fn range_at(&self, k: i64) -> (f64, f64, Vec<f64>, Vec<f64>) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        let mut alpha_lo = Vec::with_capacity(self.orders.len());
        let mut alpha_hi = Vec::with_capacity(self.orders.len());
        for (r, b) in self.orders.iter().zip(&self.boxes) {
            let p = int_pow(k, *r) as f64;
            lo += b.lo * p;
            hi += b.hi * p;
            alpha_lo.push(b.lo);
            alpha_hi.push(b.hi);
        }
        (lo, hi, alpha_lo, alpha_hi)
    }
}

/// Certificate that a symbol family satisfies the nonresonance hypotheses:
/// `|α_1| > β_1` on the leading box and `|ψ_α(k)| >= β_2` for all `k ≠ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesesWitness {
    pub beta1: f64,
    pub beta2: f64,
    pub family: SymbolFamily,
    pub k_scan_limit: u64,
    /// Modes `|k| >= tail_start` are covered by leading-term domination.
    pub tail_start: u64,
    /// `inf_{k,α} |Σ α_m k^{r_m - r_1}|`.
    pub leading_ratio_inf: f64,
    /// `sup_{k,α} |Σ α_m k^{r_m - r_1}|`.
    pub leading_ratio_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The leading box reaches zero.
    LeadingCoefficient { alpha1: f64 },
    /// `ψ_α(k) = 0` for the reported parameters.
    Resonance { k: i64, alpha: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum HypothesesOutcome {
    Witness(HypothesesWitness),
    Violation(Violation),
}

impl HypothesesOutcome {
    pub fn witness(self) -> Result<HypothesesWitness> {
        match self {
            Self::Witness(w) => Ok(w),
            Self::Violation(Violation::Resonance { k, .. }) => Err(Error::HypothesesViolated { k }),
            Self::Violation(Violation::LeadingCoefficient { .. }) => {
                Err(Error::HypothesesViolated { k: 0 })
            }
        }
    }
}

/// Scans `1 <= k <= k_scan_limit` and certifies the tail by leading-term
/// domination. Only `k > 0` is scanned: odd orders give `|ψ(-k)| = |ψ(k)|`.
pub fn check_hypotheses(family: &SymbolFamily, k_scan_limit: u64) -> Result<HypothesesOutcome> {
    let family = SymbolFamily::new(family.orders.clone(), family.boxes.clone())?;
    let lead = family.boxes[0];
    let lead_inf = lead.inf_abs();
    if lead_inf == 0.0 {
        return Ok(HypothesesOutcome::Violation(Violation::LeadingCoefficient {
            alpha1: 0.0,
        }));
    }
    let beta1 = 0.5 * lead_inf;
    let r1 = family.orders[0] as f64;
    let rest_sup: f64 = family.boxes[1..].iter().map(|b| b.sup_abs()).sum();

    // Smallest N with N^{r_2 - r_1} · rest_sup < β_1.
    let tail_start = if family.orders.len() == 1 || rest_sup == 0.0 {
        1
    } else {
        let gap = r1 - family.orders[1] as f64;
        let mut n = ((rest_sup / beta1).powf(1.0 / gap)).floor().max(1.0) as u64;
        while (n as f64).powf(-gap) * rest_sup >= beta1 {
            n += 1;
        }
        n
    };
    if tail_start > k_scan_limit + 1 {
        return Err(Error::HypothesesInconclusive {
            needed: tail_start - 1,
            limit: k_scan_limit,
        });
    }

    let mut beta2 = f64::INFINITY;
    let mut ratio_inf = f64::INFINITY;
    let mut ratio_sup: f64 = 0.0;
    for k in 1..=k_scan_limit as i64 {
        let (lo, hi, alpha_lo, alpha_hi) = family.range_at(k);
        if lo <= 0.0 && 0.0 <= hi {
            let lambda = if hi > lo { -lo / (hi - lo) } else { 0.0 };
            let alpha = alpha_lo
                .iter()
                .zip(&alpha_hi)
                .map(|(a, b)| a + lambda * (b - a))
                .collect();
            return Ok(HypothesesOutcome::Violation(Violation::Resonance { k, alpha }));
        }
        let min_abs = lo.abs().min(hi.abs());
        let max_abs = lo.abs().max(hi.abs());
        let scale = (k as f64).powf(r1);
        beta2 = beta2.min(min_abs);
        ratio_inf = ratio_inf.min(min_abs / scale);
        ratio_sup = ratio_sup.max(max_abs / scale);
    }

    // Tail |k| > k_scan_limit: |ψ(k)| >= k^{r_1} (|α_1| - rest) with rest < β_1.
    let first_tail = (k_scan_limit + 1) as f64;
    let rest_tail = if family.orders.len() == 1 {
        0.0
    } else {
        rest_sup * first_tail.powf(family.orders[1] as f64 - r1)
    };
    let tail_inf = lead_inf - rest_tail;
    debug_assert!(tail_inf > beta1 * (1.0 - 1e-12));
    beta2 = beta2.min(tail_inf * first_tail.powf(r1));
    ratio_inf = ratio_inf.min(tail_inf);
    ratio_sup = ratio_sup.max(lead.sup_abs() + rest_tail);

    Ok(HypothesesOutcome::Witness(HypothesesWitness {
        beta1,
        beta2,
        family,
        k_scan_limit,
        tail_start,
        leading_ratio_inf: ratio_inf,
        leading_ratio_sup: ratio_sup,
    }))
}
