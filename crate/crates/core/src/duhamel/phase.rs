//! Exact phase identities `k^r - (k-j)^r - j^r` for `r = 3, 5, 7` and the
//! denominator bounds that drive the derivative gain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::int_pow;

/// `k ≠ 0`, `j ≠ 0`, `j ≠ k`.
pub fn admissible(k: i64, j: i64) -> bool {
    k != 0 && j != 0 && j != k
}

fn check(k: i64, j: i64) -> Result<()> {
    if admissible(k, j) {
        Ok(())
    } else {
        Err(Error::ExcludedPair { k, j })
    }
}

/// `σ = k² - kj + j²`.
pub fn sigma(k: i64, j: i64) -> i128 {
    let (k, j) = (k as i128, j as i128);
    k * k - k * j + j * j
}

/// `τ = k⁴ - 2k²(k-j)j + (k-j)²j²`.
pub fn tau(k: i64, j: i64) -> i128 {
    let (k, j) = (k as i128, j as i128);
    let m = k - j;
    k.pow(4) - 2 * k * k * m * j + m * m * j * j
}

/// `k^r - (k-j)^r - j^r` by direct expansion.
pub fn direct_difference(r: u32, k: i64, j: i64) -> i128 {
    int_pow(k, r) - int_pow(k - j, r) - int_pow(j, r)
}

/// Factored form of [`direct_difference`] for `r ∈ {1, 3, 5, 7}`.
pub fn factored_difference(r: u32, k: i64, j: i64) -> Result<i128> {
    check(k, j)?;
    let (kk, jj, m) = (k as i128, j as i128, (k - j) as i128);
    Ok(match r {
        1 => 0,
        3 => 3 * kk * jj * m,
        5 => 5 * m * jj * kk * sigma(k, j),
        7 => 7 * m * jj * kk * tau(k, j),
        _ => {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: format!("no factorization for r = {r}"),
            })
        }
    })
}

/// A resonance function value split as `integer + θ · theta_coefficient`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseValue {
    pub integer: i128,
    pub theta_coefficient: i128,
    pub theta: f64,
}

impl PhaseValue {
    pub fn integer(value: i128) -> Self {
        Self {
            integer: value,
            theta_coefficient: 0,
            theta: 0.0,
        }
    }

    pub fn value(&self) -> f64 {
        self.integer as f64 + self.theta * self.theta_coefficient as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityScan {
    pub kmax: i64,
    pub pairs_checked: u64,
    pub failures: u64,
    pub positivity_failures: u64,
}

/// Checks every factored identity and the even-power forms of `σ` and `τ`
/// over admissible `|k|, |j| <= kmax`.
pub fn scan_identities(kmax: i64) -> IdentityScan {
    use rayon::prelude::*;
    let (pairs, failures, positivity) = (-kmax..=kmax)
        .into_par_iter()
        .map(|k| {
            let mut acc = (0u64, 0u64, 0u64);
            for j in -kmax..=kmax {
                if !admissible(k, j) {
                    continue;
                }
                acc.0 += 1;
                for r in [3u32, 5, 7] {
                    if factored_difference(r, k, j).ok() != Some(direct_difference(r, k, j)) {
                        acc.1 += 1;
                    }
                }
                let (s, t) = (sigma(k, j), tau(k, j));
                if 2 * s != int_pow(k, 2) + int_pow(k - j, 2) + int_pow(j, 2)
                    || 2 * t != int_pow(k, 4) + int_pow(k - j, 4) + int_pow(j, 4)
                {
                    acc.1 += 1;
                }
                if s <= 0 || t <= 0 {
                    acc.2 += 1;
                }
            }
            acc
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    IdentityScan {
        kmax,
        pairs_checked: pairs,
        failures,
        positivity_failures: positivity,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub max: f64,
    pub bound: f64,
    pub argmax: (i64, i64),
}

impl BoundEntry {
    fn new(bound: f64) -> Self {
        Self {
            max: 0.0,
            bound,
            argmax: (0, 0),
        }
    }

    fn update(&mut self, value: f64, k: i64, j: i64) {
        if value > self.max {
            self.max = value;
            self.argmax = (k, j);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        if other.max > self.max || (other.max == self.max && other.argmax < self.argmax) {
            self.max = other.max;
            self.argmax = other.argmax;
        }
        self
    }

    pub fn passes(&self) -> bool {
        self.max <= self.bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenominatorBounds {
    pub kmax: i64,
    pub theta: f64,
    /// `|k²/σ| <= 2`.
    pub k2_over_sigma: BoundEntry,
    /// `|k⁴/τ| <= 2`.
    pub k4_over_tau: BoundEntry,
    /// `|k³/(j(k-j)σ)| <= 4`.
    pub k3_over_j_kj_sigma: BoundEntry,
    /// `|k²/(kj(k-j))| <= 2`.
    pub k2_over_kdv: BoundEntry,
    /// `|k²/(σ + 3θ/5)| <= 2`.
    pub k2_over_sigma_plus: BoundEntry,
    /// `|k²/(σ - 3θ/5)| <= 2`.
    pub k2_over_sigma_minus: BoundEntry,
}

impl DenominatorBounds {
    pub fn passes(&self) -> bool {
        [
            self.k2_over_sigma,
            self.k4_over_tau,
            self.k3_over_j_kj_sigma,
            self.k2_over_kdv,
            self.k2_over_sigma_plus,
            self.k2_over_sigma_minus,
        ]
        .iter()
        .all(BoundEntry::passes)
    }
}

/// Maxima of the normal-form denominator ratios over admissible
/// `|k|, |j| <= kmax`; both signs of the Kawahara shift are reported.
pub fn denominator_bounds(kmax: i64, theta: f64) -> DenominatorBounds {
    use rayon::prelude::*;
    let empty = DenominatorBounds {
        kmax,
        theta,
        k2_over_sigma: BoundEntry::new(2.0),
        k4_over_tau: BoundEntry::new(2.0),
        k3_over_j_kj_sigma: BoundEntry::new(4.0),
        k2_over_kdv: BoundEntry::new(2.0),
        k2_over_sigma_plus: BoundEntry::new(2.0),
        k2_over_sigma_minus: BoundEntry::new(2.0),
    };
    let shift = 0.6 * theta;
    (-kmax..=kmax)
        .into_par_iter()
        .map(|k| {
            let mut b = empty;
            let k2 = int_pow(k, 2) as f64;
            for j in -kmax..=kmax {
                if !admissible(k, j) {
                    continue;
                }
                let s = sigma(k, j) as f64;
                let m = (k - j) as f64;
                let jf = j as f64;
                b.k2_over_sigma.update(k2 / s, k, j);
                b.k4_over_tau
                    .update(int_pow(k, 4) as f64 / tau(k, j) as f64, k, j);
                b.k3_over_j_kj_sigma
                    .update((int_pow(k, 3) as f64 / (jf * m * s)).abs(), k, j);
                b.k2_over_kdv
                    .update((k2 / (k as f64 * jf * m)).abs(), k, j);
                b.k2_over_sigma_plus.update((k2 / (s + shift)).abs(), k, j);
                b.k2_over_sigma_minus.update((k2 / (s - shift)).abs(), k, j);
            }
            b
        })
        .reduce(
            || empty,
            |a, b| DenominatorBounds {
                kmax,
                theta,
                k2_over_sigma: a.k2_over_sigma.merge(b.k2_over_sigma),
                k4_over_tau: a.k4_over_tau.merge(b.k4_over_tau),
                k3_over_j_kj_sigma: a.k3_over_j_kj_sigma.merge(b.k3_over_j_kj_sigma),
                k2_over_kdv: a.k2_over_kdv.merge(b.k2_over_kdv),
                k2_over_sigma_plus: a.k2_over_sigma_plus.merge(b.k2_over_sigma_plus),
                k2_over_sigma_minus: a.k2_over_sigma_minus.merge(b.k2_over_sigma_minus),
            },
        )
}
