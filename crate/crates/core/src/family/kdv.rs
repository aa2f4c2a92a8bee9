//! `∂_t u = -∂_x^3 u - α ∂_x u - u ∂_x u`, symbol `i(k^3 - αk)`.

use super::{assign_args, DispersionFamily, FamilyParams, SmoothingIndices};
use crate::duhamel::phase::{factored_difference, PhaseValue};
use crate::error::Result;
use crate::symbols::{LinearSymbol, ParameterBox, SymbolFamily};

#[derive(Debug, Clone, Copy, Default)]
pub struct Kdv;

impl DispersionFamily for Kdv {
    fn name(&self) -> &'static str {
        "kdv"
    }

    fn orders(&self) -> &'static [u32] {
        &[3, 1]
    }

    fn nonlinear_coefficient(&self) -> f64 {
        -1.0
    }

    fn parameter_names(&self) -> &'static [&'static str] {
        &["alpha"]
    }

    fn params_from_args(&self, args: &[f64]) -> Result<FamilyParams> {
        assign_args(self.name(), self.parameter_names(), args)
    }

    fn symbol(&self, params: &FamilyParams) -> Result<LinearSymbol> {
        LinearSymbol::new([(1.0, 3), (-params.alpha, 1)])
    }

    fn parameter_family(&self, params: &FamilyParams) -> Result<SymbolFamily> {
        SymbolFamily::new(
            vec![3, 1],
            vec![
                ParameterBox::point(1.0),
                ParameterBox::symmetric(0.5).hull_with(-params.alpha),
            ],
        )
    }

    fn shift_mean(&self, params: &FamilyParams, mean: f64) -> FamilyParams {
        FamilyParams {
            alpha: params.alpha + mean,
            ..*params
        }
    }

    fn phase(&self, _params: &FamilyParams, k: i64, j: i64) -> Result<PhaseValue> {
        Ok(PhaseValue::integer(factored_difference(3, k, j)?))
    }

    fn smoothing_indices(&self) -> SmoothingIndices {
        SmoothingIndices {
            s: 4.0,
            p: 2.0,
            p_tilde: 2.0,
            q: 1.0,
        }
    }
}
