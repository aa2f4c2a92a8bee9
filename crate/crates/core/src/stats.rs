//! Least-squares power-law fits used by the scaling experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    /// Exponent `a` in `y ≈ C x^a`.
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero for two points.
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `log y = a log x + b`. All values must be positive and finite and at
/// least two distinct `x` are needed.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() {
        return Err(Error::DegenerateLadder("x and y lengths differ".into()));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateLadder("need at least two rungs".into()));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::DegenerateLadder(
            "power-law fit needs positive finite values".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 1e-24 {
        return Err(Error::DegenerateLadder("all rungs coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_stderr = if lx.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok(LogLogFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        points: lx.len(),
    })
}

/// Amplitude ladders must hold at least two positive finite values in
/// strictly decreasing order.
pub fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < 2 {
        return Err(Error::DegenerateLadder("need at least two rungs".into()));
    }
    if ladder.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::DegenerateLadder("amplitudes must be positive and finite".into()));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::DegenerateLadder("amplitudes must strictly decrease".into()));
    }
    Ok(())
}

/// Geometric ladder from `hi` down to `lo` with `rungs` entries.
pub fn geometric_ladder(hi: f64, lo: f64, rungs: usize) -> Vec<f64> {
    match rungs {
        0 => Vec::new(),
        1 => vec![hi],
        _ => {
            let r = (lo / hi).powf(1.0 / (rungs - 1) as f64);
            (0..rungs)
                .map(|i| if i + 1 == rungs { lo } else { hi * r.powi(i as i32) })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.5)).collect();
        let f = loglog_fit(&x, &y).unwrap();
        assert!((f.slope - 2.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(loglog_fit(&[1.0], &[1.0]).is_err());
        assert!(loglog_fit(&[0.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(loglog_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn ladder_guard() {
        assert!(check_ladder(&[1e-2, 1e-3]).is_ok());
        assert!(check_ladder(&[0.0, 0.0]).is_err());
        assert!(check_ladder(&[1e-3, 1e-3]).is_err());
        assert!(check_ladder(&[1e-2, f64::NAN]).is_err());
    }

    #[test]
    fn ladder_endpoints() {
        let l = geometric_ladder(1e-2, 1e-3, 4);
        assert_eq!(l.len(), 4);
        assert_eq!(l[0], 1e-2);
        assert_eq!(l[3], 1e-3);
        assert!(l.windows(2).all(|w| w[1] < w[0]));
    }

    proptest! {
        #[test]
        fn recovers_slope(a in -4.0f64..4.0, c in 0.1f64..10.0) {
            let x = [0.5, 1.0, 3.0, 7.0, 11.0];
            let y: Vec<f64> = x.iter().map(|v: &f64| c * v.powf(a)).collect();
            let f = loglog_fit(&x, &y).unwrap();
            prop_assert!((f.slope - a).abs() < 1e-10);
        }
    }
}
