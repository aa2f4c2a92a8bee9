//! Kawahara: symbol `i(k^5 - θk^3 - 2αk)`, nonlinearity `-2u ∂_x u`.
//!
//! Resonant when `θ = k²` for some integer `k`; such `θ` are rejected.

use super::{assign_args, DispersionFamily, FamilyParams, SmoothingIndices};
use crate::duhamel::phase::{factored_difference, PhaseValue};
use crate::error::{Error, Result};
use crate::symbols::{LinearSymbol, ParameterBox, SymbolFamily};

#[derive(Debug, Clone, Copy, Default)]
pub struct Kawahara;

/// Half of `min_{k>=1} |k^4 - θk^2|`: any first-order coefficient below this
/// in magnitude keeps `|ψ(k)| >= |k| · alpha_bar`.
pub fn alpha_bar(theta: f64) -> f64 {
    let kmax = theta.abs().sqrt().ceil() as i64 + 2;
    let min = (1..=kmax)
        .map(|k| {
            let k2 = (k * k) as f64;
            (k2 * k2 - theta * k2).abs()
        })
        .fold(f64::INFINITY, f64::min);
    0.5 * min
}

impl DispersionFamily for Kawahara {
    fn name(&self) -> &'static str {
        "kawahara"
    }

    fn orders(&self) -> &'static [u32] {
        &[5, 3, 1]
    }

    fn nonlinear_coefficient(&self) -> f64 {
        -2.0
    }

    fn parameter_names(&self) -> &'static [&'static str] {
        &["theta", "alpha"]
    }

    fn params_from_args(&self, args: &[f64]) -> Result<FamilyParams> {
        assign_args(self.name(), self.parameter_names(), args)
    }

    fn symbol(&self, params: &FamilyParams) -> Result<LinearSymbol> {
        let theta = params.theta;
        let root = theta.abs().sqrt().round();
        if theta > 0.0 && (root * root - theta).abs() <= 1e-12 * theta.max(1.0) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("k^5 - theta k^3 vanishes at k = {root}"),
            });
        }
        LinearSymbol::new([(1.0, 5), (-theta, 3), (-2.0 * params.alpha, 1)])
    }

    fn parameter_family(&self, params: &FamilyParams) -> Result<SymbolFamily> {
        SymbolFamily::new(
            vec![5, 3, 1],
            vec![
                ParameterBox::point(1.0),
                ParameterBox::point(-params.theta),
                ParameterBox::symmetric(alpha_bar(params.theta)).hull_with(-2.0 * params.alpha),
            ],
        )
    }

    fn shift_mean(&self, params: &FamilyParams, mean: f64) -> FamilyParams {
        FamilyParams {
            alpha: params.alpha + mean,
            ..*params
        }
    }

    fn phase(&self, params: &FamilyParams, k: i64, j: i64) -> Result<PhaseValue> {
        Ok(PhaseValue {
            integer: factored_difference(5, k, j)?,
            theta_coefficient: -factored_difference(3, k, j)?,
            theta: params.theta,
        })
    }

    fn smoothing_indices(&self) -> SmoothingIndices {
        SmoothingIndices {
            s: 6.0,
            p: 2.0,
            p_tilde: 0.0,
            q: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_bar_half() {
        assert_eq!(alpha_bar(0.5), 0.25);
        assert_eq!(alpha_bar(0.0), 0.5);
    }
}
