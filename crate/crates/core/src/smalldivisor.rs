//! Period sets `W_{p,δ} ⊂ [T1, T2]` on which `|(1 - e^{iψ(k)T})^{-1}| < c1 |k|^p`.
//!
//! For each mode `1 <= k <= k_max` the removed intervals are centred at
//! `2πn/|ψ(k)|` with radius `c0 |k|^{-p-r1}`. There are far too many of them
//! to store (`~|k|^5` per mode), so intervals are enumerated lazily and
//! membership only looks at the nearest centre of each mode. Modes `k` and
//! `-k` produce the same intervals and are handled once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::{reduced_angle, HypothesesWitness, LinearSymbol};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `Σ_{k≠0} |k|^{-p}` bounded above by a partial sum to `n` plus the integral
/// tail `n^{1-p}/(p-1)`.
pub fn p_series_bound(p: f64, n: u64) -> f64 {
    2.0 * (partial_sum(p, n) + tail_bound(p, n))
}

fn partial_sum(p: f64, n: u64) -> f64 {
    // Smallest terms first.
    (1..=n).rev().map(|k| (k as f64).powf(-p)).sum()
}

/// Upper bound on `Σ_{k>n} k^{-p}`.
fn tail_bound(p: f64, n: u64) -> f64 {
    (n as f64).powf(1.0 - p) / (p - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcludedInterval {
    pub k: i64,
    pub n: i64,
    pub center: f64,
    pub radius: f64,
}

impl ExcludedInterval {
    pub fn lo(&self) -> f64 {
        self.center - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.center + self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Membership {
    /// Not removed by any mode `|k| <= k_max`.
    InWTruncated,
    Excluded(ExcludedInterval),
    OutsideWindow,
}

impl Membership {
    pub fn is_certified(&self) -> bool {
        matches!(self, Membership::InWTruncated)
    }
}

/// Per-mode summary of the removed intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub k: i64,
    pub psi: f64,
    pub radius: f64,
    pub n_first: i64,
    pub n_last: i64,
    pub count: u64,
    pub removed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedSet {
    pub t1: f64,
    pub t2: f64,
    pub p: f64,
    pub delta: f64,
    pub c0: f64,
    pub c1: f64,
    pub k_max: u64,
    pub leading_order: u32,
    /// `inf` and `sup` over `k` and the parameter box of `|Σ α_m k^{r_m - r_1}|`.
    pub ratio_inf: f64,
    pub ratio_sup: f64,
    pub p_series: f64,
    /// Sum of the clipped interval lengths over `1 <= k <= k_max`.
    pub removed_measure: f64,
    /// Bound on the length removed by modes `|k| > k_max`.
    pub uncertified_tail: f64,
    pub symbol: LinearSymbol,
    modes: Vec<ModeSummary>,
}

/// Builds the excluded set for `symbol` over `[t1, t2]`.
pub fn build_excluded_set(
    symbol: &LinearSymbol,
    witness: &HypothesesWitness,
    t1: f64,
    t2: f64,
    p: f64,
    delta: f64,
    k_max: u64,
) -> Result<ExcludedSet> {
    if !(t1 > 0.0 && t2 > t1 && t2.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("need 0 < T1 < T2, got [{t1}, {t2}]"),
        });
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("need p > 1 for a convergent series, got {p}"),
        });
    }
    if !(delta > 0.0 && delta < t2 - t1) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("need 0 < delta < T2 - T1, got {delta}"),
        });
    }
    if k_max == 0 || k_max > 1 << 20 {
        return Err(Error::InvalidParameter {
            name: "k_max",
            reason: format!("need 1 <= k_max <= 2^20, got {k_max}"),
        });
    }
    if !witness.family.contains(symbol) {
        return Err(Error::InvalidParameter {
            name: "witness",
            reason: "symbol coefficients lie outside the witnessed parameter boxes".into(),
        });
    }
    let ratio_inf = witness.leading_ratio_inf;
    let ratio_sup = witness.leading_ratio_sup;
    let width = t2 - t1;
    let p_series = p_series_bound(p, k_max);
    let spread = 1.0 + width * ratio_sup;
    let c0 = 0.99 * (1.5 / ratio_sup).min(delta / (2.0 * spread * p_series));
    let c1 = (2f64.sqrt() / c0) / ratio_inf;
    let uncertified_tail = 2.0 * c0 * spread * 2.0 * tail_bound(p, k_max);

    let leading_order = symbol.leading_order();
    let mut set = ExcludedSet {
        t1,
        t2,
        p,
        delta,
        c0,
        c1,
        k_max,
        leading_order,
        ratio_inf,
        ratio_sup,
        p_series,
        removed_measure: 0.0,
        uncertified_tail,
        symbol: symbol.clone(),
        modes: Vec::with_capacity(k_max as usize),
    };
    for k in 1..=k_max as i64 {
        let summary = set.summarize(k);
        set.modes.push(summary);
    }
    set.removed_measure = set.modes.iter().map(|m| m.removed).sum();
    debug_assert!(set.removed_measure <= delta, "removed {} > delta {delta}", set.removed_measure);
    if set.removed_measure > delta {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("removed measure {} exceeds delta", set.removed_measure),
        });
    }
    Ok(set)
}

impl ExcludedSet {
    /// `c0 |k|^{-p-r1}`.
    pub fn radius(&self, k: i64) -> f64 {
        self.c0 * (k.unsigned_abs() as f64).powf(-self.p - self.leading_order as f64)
    }

    fn abs_psi(&self, k: i64) -> f64 {
        self.symbol.value(k).abs()
    }

    /// Range of `n` whose intervals meet `[T1, T2]`.
    fn n_range(&self, k: i64) -> (i64, i64) {
        let a = self.abs_psi(k);
        let r = self.radius(k);
        let lo = ((self.t1 - r) * a / TWO_PI).ceil().max(1.0) as i64;
        let hi = ((self.t2 + r) * a / TWO_PI).floor() as i64;
        (lo, hi)
    }

    fn interval(&self, k: i64, n: i64) -> ExcludedInterval {
        ExcludedInterval {
            k,
            n,
            center: TWO_PI * n as f64 / self.abs_psi(k),
            radius: self.radius(k),
        }
    }

    fn clipped(&self, iv: &ExcludedInterval) -> f64 {
        (iv.hi().min(self.t2) - iv.lo().max(self.t1)).max(0.0)
    }

    fn summarize(&self, k: i64) -> ModeSummary {
        let (n_first, n_last) = self.n_range(k);
        let radius = self.radius(k);
        let count = if n_last >= n_first {
            (n_last - n_first + 1) as u64
        } else {
            0
        };
        // Intervals of one mode are disjoint and spaced by 2π/|ψ| > 2r, so only
        // the first and last can stick out of the window.
        let removed = match count {
            0 => 0.0,
            1 => self.clipped(&self.interval(k, n_first)),
            _ => {
                self.clipped(&self.interval(k, n_first))
                    + self.clipped(&self.interval(k, n_last))
                    + (count - 2) as f64 * 2.0 * radius
            }
        };
        ModeSummary {
            k,
            psi: self.symbol.value(k),
            radius,
            n_first,
            n_last,
            count,
            removed,
        }
    }

    pub fn mode_summaries(&self) -> &[ModeSummary] {
        &self.modes
    }

    pub fn interval_count(&self) -> u64 {
        self.modes.iter().map(|m| m.count).sum()
    }

    /// Removed intervals of mode `k` meeting the window, in increasing order.
    pub fn intervals_for_mode(&self, k: i64) -> impl Iterator<Item = ExcludedInterval> + '_ {
        let k = k.abs();
        let (lo, hi) = if k >= 1 && k as u64 <= self.k_max {
            self.n_range(k)
        } else {
            (1, 0)
        };
        (lo..=hi).map(move |n| self.interval(k, n))
    }

    /// Every stored interval, mode by mode. Only practical for small `k_max`
    /// or low-order symbols.
    pub fn intervals(&self) -> impl Iterator<Item = ExcludedInterval> + '_ {
        (1..=self.k_max as i64).flat_map(move |k| self.intervals_for_mode(k))
    }

    /// Nearest interval of mode `k` to `period` and the reduced phase
    /// `ψ(k)T - 2πn`.
    fn nearest(&self, k: i64, period: f64) -> (ExcludedInterval, f64) {
        let a = self.abs_psi(k);
        let d = reduced_angle(a, period);
        let n = ((a * period - d) / TWO_PI).round() as i64;
        (self.interval(k, n), d)
    }

    /// Closed-interval membership against modes `1 <= |k| <= k_max`.
    pub fn contains(&self, period: f64) -> Membership {
        if !(period >= self.t1 && period <= self.t2) {
            return Membership::OutsideWindow;
        }
        for k in 1..=self.k_max as i64 {
            let (iv, d) = self.nearest(k, period);
            // |T - center| <= r  ⇔  |ψT - 2πn| <= r|ψ|
            if iv.n >= 1 && d.abs() <= iv.radius * self.abs_psi(k) {
                return Membership::Excluded(iv);
            }
        }
        Membership::InWTruncated
    }

    /// Distance from `period` to the closest removed interval among modes
    /// `|k| <= k_max` (zero inside one).
    pub fn gap_to_excluded(&self, period: f64) -> (f64, ExcludedInterval) {
        let mut best: Option<(f64, ExcludedInterval)> = None;
        for k in 1..=self.k_max as i64 {
            let (iv, d) = self.nearest(k, period);
            let gap = (d.abs() / self.abs_psi(k) - iv.radius).max(0.0);
            if best.map_or(true, |(g, _)| gap < g) {
                best = Some((gap, iv));
            }
        }
        best.expect("k_max >= 1")
    }

    /// Gap to the nearest removed interval of a single mode.
    pub fn gap_for_mode(&self, k: i64, period: f64) -> f64 {
        let (iv, d) = self.nearest(k, period);
        (d.abs() / self.abs_psi(k) - iv.radius).max(0.0)
    }

    /// Uniform rejection sampling of certified periods.
    pub fn sample_periods(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let budget = 1000 * count + 1000;
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            if attempts == budget {
                return Err(Error::SamplingExhausted {
                    attempts,
                    accepted: out.len(),
                });
            }
            attempts += 1;
            let t = rng.gen_range(self.t1..=self.t2);
            if self.contains(t).is_certified() {
                out.push(t);
            }
        }
        Ok(out)
    }

    /// `|(1 - e^{iψ(k)T})^{-1}| / (c1 |k|^p)`, without the membership gate.
    pub fn bound_ratio(&self, period: f64, k: i64) -> f64 {
        let m = self.symbol.inverse_factor_magnitude(period, k);
        m / (self.c1 * (k.unsigned_abs() as f64).powf(self.p))
    }

    /// Checks the inverse-factor bound on `1 <= k <= k_hi` for a certified period.
    pub fn certify_bound(&self, period: f64, k_hi: u64) -> CertifyReport {
        let membership = self.contains(period);
        if !membership.is_certified() {
            return CertifyReport {
                period,
                k_hi,
                membership,
                max_scaled: None,
                argmax: None,
                c1: self.c1,
                pass: false,
            };
        }
        let mut max = 0.0f64;
        let mut argmax = 1;
        for k in 1..=k_hi as i64 {
            let m = self.symbol.inverse_factor_magnitude(period, k)
                * (k as f64).powf(-self.p);
            if m > max {
                max = m;
                argmax = k;
            }
        }
        CertifyReport {
            period,
            k_hi,
            membership,
            max_scaled: Some(max),
            argmax: Some(argmax),
            c1: self.c1,
            pass: max.is_finite() && max < self.c1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub period: f64,
    pub k_hi: u64,
    pub membership: Membership,
    /// `max_k |inverse factor| · |k|^{-p}`; absent when the period was skipped.
    pub max_scaled: Option<f64>,
    pub argmax: Option<i64>,
    pub c1: f64,
    pub pass: bool,
}

impl CertifyReport {
    pub fn skipped(&self) -> bool {
        self.max_scaled.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMeasure {
    pub n: u32,
    pub delta: f64,
    pub c0: f64,
    pub removed: f64,
}

/// Removed measure of the level sets `W_{p,(T2-T1)/n}` for `n = 2..=n_levels`.
pub fn nested_union_measure(
    symbol: &LinearSymbol,
    witness: &HypothesesWitness,
    t1: f64,
    t2: f64,
    p: f64,
    k_max: u64,
    n_levels: u32,
) -> Result<Vec<LevelMeasure>> {
    if n_levels < 2 {
        return Err(Error::InvalidParameter {
            name: "n_levels",
            reason: "need at least two levels".into(),
        });
    }
    (2..=n_levels)
        .map(|n| {
            let delta = (t2 - t1) / n as f64;
            let set = build_excluded_set(symbol, witness, t1, t2, p, delta, k_max)?;
            Ok(LevelMeasure {
                n,
                delta,
                c0: set.c0,
                removed: set.removed_measure,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::EquationFamily;
    use crate::symbols::{check_hypotheses, SymbolFamily};

    fn cubic() -> (LinearSymbol, HypothesesWitness) {
        let s = LinearSymbol::new([(1.0, 3)]).unwrap();
        let w = check_hypotheses(&SymbolFamily::from_symbol(&s), 16)
            .unwrap()
            .witness()
            .unwrap();
        (s, w)
    }

    #[test]
    fn p_series_brackets_zeta() {
        // ζ(2) = π²/6
        let b = p_series_bound(2.0, 1000);
        let exact = std::f64::consts::PI.powi(2) / 3.0;
        assert!(b >= exact && b - exact < 1e-5);
    }

    #[test]
    fn cubic_enumeration() {
        let (s, w) = cubic();
        let set = build_excluded_set(&s, &w, 1.0, 2.0, 1.5, 0.1, 64).unwrap();
        assert_eq!(set.intervals_for_mode(1).count(), 0);
        let two: Vec<_> = set.intervals_for_mode(2).collect();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].n, 2);
        assert!((two[0].center - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(set.contains(1.2), Membership::InWTruncated);
        assert_eq!(set.contains(0.5), Membership::OutsideWindow);
        assert_eq!(set.contains(2.5), Membership::OutsideWindow);
        for iv in set.intervals().take(500) {
            assert!(matches!(set.contains(iv.center), Membership::Excluded(_)));
        }
        // c0 caps of the homogeneous case.
        assert!(set.c0 < 1.5);
        assert!(set.c0 < 0.1 / (2.0 * 2.0 * set.p_series));
        assert!((set.c1 - 2f64.sqrt() / set.c0).abs() < 1e-12 * set.c1);
    }

    #[test]
    fn ties_are_excluded() {
        let (s, w) = cubic();
        let set = build_excluded_set(&s, &w, 1.0, 2.0, 1.5, 0.1, 8).unwrap();
        let iv = set.intervals_for_mode(2).next().unwrap();
        let inside = iv.center + 0.999 * iv.radius;
        assert!(matches!(set.contains(inside), Membership::Excluded(_)));
        let outside = iv.center + 1.001 * iv.radius;
        assert!(!matches!(set.contains(outside), Membership::Excluded(e) if e.k == 2));
    }

    #[test]
    fn removed_measure_matches_enumeration() {
        let (s, w) = cubic();
        let set = build_excluded_set(&s, &w, 1.0, 2.0, 1.5, 0.1, 24).unwrap();
        let brute: f64 = set.intervals().map(|iv| set.clipped(&iv)).sum();
        assert!((brute - set.removed_measure).abs() < 1e-12);
        assert!(set.removed_measure <= 0.1);
        // Disjoint within a mode.
        for k in 1..=24 {
            let ivs: Vec<_> = set.intervals_for_mode(k).collect();
            for w in ivs.windows(2) {
                assert!(w[0].hi() < w[1].lo());
            }
        }
        // Endpoint phase equals c0 |k|^{-p-r1} |ψ(k)| < 3/2.
        for m in set.mode_summaries() {
            assert!(m.radius * m.psi.abs() < 1.5);
        }
    }

    #[test]
    fn argument_validation() {
        let (s, w) = cubic();
        assert!(build_excluded_set(&s, &w, 1.0, 2.0, 1.0, 0.1, 8).is_err());
        assert!(build_excluded_set(&s, &w, 1.0, 2.0, 1.5, 1.0, 8).is_err());
        assert!(build_excluded_set(&s, &w, 2.0, 1.0, 1.5, 0.1, 8).is_err());
        let other = LinearSymbol::new([(2.0, 3)]).unwrap();
        assert!(build_excluded_set(&other, &w, 1.0, 2.0, 1.5, 0.1, 8).is_err());
    }

    #[test]
    fn sampling_and_certification() {
        let s = LinearSymbol::new([(1.0, 5)]).unwrap();
        let w = check_hypotheses(&SymbolFamily::from_symbol(&s), 16)
            .unwrap()
            .witness()
            .unwrap();
        let set = build_excluded_set(&s, &w, 1.0, 2.0, 1.5, 0.1, 128).unwrap();
        assert!(set.sample_periods(0, 1).unwrap().is_empty());
        let ts = set.sample_periods(100, 42).unwrap();
        assert_eq!(ts, set.sample_periods(100, 42).unwrap());
        for t in ts {
            let r = set.certify_bound(t, 128);
            assert!(r.pass, "{r:?}");
        }
        let iv = set.intervals_for_mode(3).nth(5).unwrap();
        assert!(set.certify_bound(iv.center, 128).skipped());
    }

    #[test]
    fn bound_is_nearly_attained_at_endpoints() {
        let f = EquationFamily::fifth(0.0);
        let set = build_excluded_set(f.symbol(), &f.witness().unwrap(), 1.0, 2.0, 1.5, 0.1, 32).unwrap();
        for k in [2i64, 3, 5, 8] {
            let iv = set.intervals_for_mode(k).nth(3).unwrap();
            for t in [iv.lo(), iv.hi()] {
                let r = set.bound_ratio(t, k);
                assert!((0.1..=1.0).contains(&r), "k={k} ratio={r}");
            }
        }
    }

    #[test]
    fn acceptance_rate_matches_measure() {
        let f = EquationFamily::fifth(0.0);
        let set = build_excluded_set(f.symbol(), &f.witness().unwrap(), 1.0, 2.0, 1.5, 0.1, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 10_000;
        let hits = (0..draws)
            .filter(|_| set.contains(rng.gen_range(1.0..=2.0)).is_certified())
            .count();
        let rate = hits as f64 / draws as f64;
        // 4σ of a binomial at p ≈ 0.9 is 0.012.
        assert!(rate >= 1.0 - 0.1 - 0.012, "rate {rate}");
    }

    #[test]
    fn nested_levels() {
        let f = EquationFamily::fifth(0.0);
        let w = f.witness().unwrap();
        assert!(nested_union_measure(f.symbol(), &w, 1.0, 2.0, 1.5, 16, 1).is_err());
        let table = nested_union_measure(f.symbol(), &w, 1.0, 2.0, 1.5, 128, 10).unwrap();
        assert_eq!(table.len(), 9);
        for row in &table {
            assert!(row.removed <= row.delta);
        }
        for w in table.windows(2) {
            assert!(w[1].c0 < w[0].c0);
        }
        assert!(table.last().unwrap().removed < 0.1);
    }
}
