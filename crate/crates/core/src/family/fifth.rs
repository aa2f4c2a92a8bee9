//! `∂_t u = ∂_x^5 u + ω ∂_x u - 2u ∂_x u`, symbol `i(k^5 + ωk)`.

use super::{assign_args, DispersionFamily, FamilyParams, SmoothingIndices};
use crate::duhamel::phase::{factored_difference, PhaseValue};
use crate::error::Result;
use crate::symbols::{LinearSymbol, ParameterBox, SymbolFamily};

#[derive(Debug, Clone, Copy, Default)]
pub struct FifthOrder;

impl DispersionFamily for FifthOrder {
    fn name(&self) -> &'static str {
        "fifth"
    }

    fn orders(&self) -> &'static [u32] {
        &[5, 1]
    }

    fn nonlinear_coefficient(&self) -> f64 {
        -2.0
    }

    fn parameter_names(&self) -> &'static [&'static str] {
        &["omega"]
    }

    fn params_from_args(&self, args: &[f64]) -> Result<FamilyParams> {
        assign_args(self.name(), self.parameter_names(), args)
    }

    fn symbol(&self, params: &FamilyParams) -> Result<LinearSymbol> {
        LinearSymbol::new([(1.0, 5), (params.omega, 1)])
    }

    fn parameter_family(&self, params: &FamilyParams) -> Result<SymbolFamily> {
        SymbolFamily::new(
            vec![5, 1],
            vec![
                ParameterBox::point(1.0),
                ParameterBox::symmetric(0.5).hull_with(params.omega),
            ],
        )
    }

    fn shift_mean(&self, params: &FamilyParams, mean: f64) -> FamilyParams {
        FamilyParams {
            omega: params.omega - 2.0 * mean,
            ..*params
        }
    }

    fn phase(&self, _params: &FamilyParams, k: i64, j: i64) -> Result<PhaseValue> {
        Ok(PhaseValue::integer(factored_difference(5, k, j)?))
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
