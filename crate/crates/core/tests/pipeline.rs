//! Cross-module runs: solver, Duhamel routes, excluded sets and the fixed
//! point map used together.

use dispersive_core::duhamel::{duhamel_direct, duhamel_normalform};
use dispersive_core::evolution::{reverse, solve, SolverConfig};
use dispersive_core::fixedpoint::{apply_k, iterate_k, DuhamelRoute};
use dispersive_core::smalldivisor::{build_excluded_set, Membership};
use dispersive_core::spectrum::{random_field, Profile};
use dispersive_core::{EquationFamily, Error, FourierField, SobolevIndex};

fn h(s: f64) -> SobolevIndex {
    SobolevIndex::new(s).unwrap()
}

#[test]
fn field_files_round_trip_through_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let fam = EquationFamily::kawahara(0.5, 0.0).unwrap();
    let u0 = random_field(16, 1e-2, 6.0, 11);
    let cfg = SolverConfig::new(16, 1e-3);
    let u1 = solve(&u0, &fam, 0.2, &cfg).unwrap().final_u();
    let path = dir.path().join("u1.json");
    u1.write_json(&path).unwrap();
    let back = FourierField::read_json(&path).unwrap();
    assert_eq!(back, u1);
    let u0_again = reverse(&back, &fam, 0.2, &cfg).unwrap();
    assert!(u0_again.sub(&u0).unwrap().sobolev_norm(h(0.0)) < 1e-12);
}

#[test]
fn routes_agree_and_feed_the_fixed_point_map() {
    let fam = EquationFamily::fifth(0.0);
    let set = build_excluded_set(fam.symbol(), &fam.witness().unwrap(), 1.0, 2.0, 1.5, 0.1, 32).unwrap();
    let period = set.sample_periods(1, 3).unwrap()[0];
    assert_eq!(set.contains(period), Membership::InWTruncated);

    let cfg = SolverConfig::new(16, 1e-3);
    let u0 = Profile::Cos { mode: 1 }.field(16, 1e-3).unwrap();
    let direct = duhamel_direct(&u0, &fam, period, &cfg).unwrap();
    let nf = duhamel_normalform(&u0, &fam, period, &cfg).unwrap();
    let rel = direct.sub(&nf.field).unwrap().sobolev_norm(h(4.0)) / direct.sobolev_norm(h(4.0));
    assert!(rel < 1e-6, "{rel}");

    let a = apply_k(&u0, &fam, period, &set, DuhamelRoute::Direct, &cfg).unwrap();
    let b = apply_k(&u0, &fam, period, &set, DuhamelRoute::NormalForm, &cfg).unwrap();
    assert!(a.sub(&b).unwrap().sobolev_norm(h(6.0)) < 1e-6 * a.sobolev_norm(h(6.0)));
    assert!(a.sobolev_norm(h(6.0)) < u0.sobolev_norm(h(6.0)));

    let it = iterate_k(&u0, &fam, period, &set, 50, 6.0, &cfg).unwrap();
    assert!(it.converged && !it.diverged);
    assert!(it.ratios().iter().all(|&r| r < 1.0));
}

#[test]
fn excluded_periods_are_refused() {
    let fam = EquationFamily::seventh(0.0);
    let set = build_excluded_set(fam.symbol(), &fam.witness().unwrap(), 1.0, 2.0, 1.5, 0.1, 16).unwrap();
    let centre = set.intervals().next().unwrap().center;
    let u0 = FourierField::cos_mode(8, 1, 1e-3);
    let cfg = SolverConfig::new(8, 1e-3);
    let err = apply_k(&u0, &fam, centre, &set, DuhamelRoute::Direct, &cfg).unwrap_err();
    assert!(matches!(err, Error::UncertifiedPeriod { .. }));
    let other = EquationFamily::fifth(0.0);
    let err = apply_k(&u0, &other, 1.5, &set, DuhamelRoute::Direct, &cfg).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter { .. }));
}
