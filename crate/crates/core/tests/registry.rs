//! A family defined outside the crate plugs into the registry and the whole
//! pipeline without further changes.

use std::sync::Arc;

use dispersive_core::duhamel::compare_routes;
use dispersive_core::duhamel::phase::PhaseValue;
use dispersive_core::evolution::{max_l2_drift, solve, SolverConfig};
use dispersive_core::family::{DispersionFamily, Kdv, SmoothingIndices};
use dispersive_core::symbols::{LinearSymbol, SymbolFamily};
use dispersive_core::{Error, FamilyParams, FamilyRegistry, FourierField};

/// KdV with half the nonlinear coupling.
#[derive(Debug)]
struct SoftKdv;

impl DispersionFamily for SoftKdv {
    fn name(&self) -> &'static str {
        "soft-kdv"
    }
    fn orders(&self) -> &'static [u32] {
        Kdv.orders()
    }
    fn nonlinear_coefficient(&self) -> f64 {
        -0.5
    }
    fn parameter_names(&self) -> &'static [&'static str] {
        Kdv.parameter_names()
    }
    fn params_from_args(&self, args: &[f64]) -> dispersive_core::Result<FamilyParams> {
        Kdv.params_from_args(args)
    }
    fn symbol(&self, params: &FamilyParams) -> dispersive_core::Result<LinearSymbol> {
        Kdv.symbol(params)
    }
    fn parameter_family(&self, params: &FamilyParams) -> dispersive_core::Result<SymbolFamily> {
        Kdv.parameter_family(params)
    }
    fn shift_mean(&self, params: &FamilyParams, mean: f64) -> FamilyParams {
        Kdv.shift_mean(params, mean)
    }
    fn phase(&self, params: &FamilyParams, k: i64, j: i64) -> dispersive_core::Result<PhaseValue> {
        Kdv.phase(params, k, j)
    }
    fn smoothing_indices(&self) -> SmoothingIndices {
        Kdv.smoothing_indices()
    }
}

#[test]
fn registered_family_runs_end_to_end() {
    let mut reg = FamilyRegistry::empty();
    assert!(matches!(reg.preset("soft-kdv"), Err(Error::UnknownFamily(_))));
    assert!(reg.register(Arc::new(SoftKdv)).is_none());
    assert_eq!(reg.names().collect::<Vec<_>>(), ["soft-kdv"]);

    let fam = reg.preset("soft-kdv(0.25)").unwrap();
    assert_eq!(fam.params().alpha, 0.25);
    assert_eq!(fam.nonlinear_coefficient(), -0.5);
    assert!(fam.witness().is_ok());

    let u0 = FourierField::cos_mode(16, 1, 1e-2);
    let cfg = SolverConfig::new(16, 1e-3);
    let traj = solve(&u0, &fam, 0.5, &cfg).unwrap();
    assert!(max_l2_drift(&traj) < 1e-12);
    let (_, _, cmp) = compare_routes(&u0, &fam, 0.5, &cfg).unwrap();
    assert!(cmp.relative_h4 < 1e-6, "{cmp:?}");
}

#[test]
fn halving_the_coupling_halves_the_duhamel_term() {
    let reg = FamilyRegistry::global();
    let mut with_soft = FamilyRegistry::with_builtins();
    with_soft.register(Arc::new(SoftKdv));
    let full = reg.preset("kdv").unwrap();
    let soft = with_soft.preset("soft-kdv").unwrap();
    let u0 = FourierField::cos_mode(16, 2, 1e-4);
    let cfg = SolverConfig::new(16, 1e-3);
    let (a, _, _) = compare_routes(&u0, &full, 0.3, &cfg).unwrap();
    let (b, _, _) = compare_routes(&u0, &soft, 0.3, &cfg).unwrap();
    let l2 = dispersive_core::SobolevIndex::new(0.0).unwrap();
    let ratio = b.sobolev_norm(l2) / a.sobolev_norm(l2);
    // Quadratic corrections are of relative size amplitude.
    assert!((ratio - 0.5).abs() < 1e-3, "{ratio}");
}
