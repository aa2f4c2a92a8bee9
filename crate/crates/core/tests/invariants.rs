use dispersive_core::spectrum::{convolve_direct, random_field, Convolver};
use dispersive_core::symbols::reduced_angle;
use dispersive_core::{EquationFamily, SobolevIndex};
use proptest::prelude::*;

fn h(s: f64) -> SobolevIndex {
    SobolevIndex::new(s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norms_increase_with_index(seed in 0u64..1000, decay in 1.0f64..8.0, s in 0.0f64..6.0) {
        let u = random_field(24, 1.0, decay, seed);
        prop_assert!(u.sobolev_norm(h(s)) <= u.sobolev_norm(h(s + 1.0)) * (1.0 + 1e-12));
        u.check_invariants(1e-14).unwrap();
    }

    #[test]
    fn products_are_commutative_and_match_direct_sums(a in 0u64..500, b in 0u64..500, modes in 2usize..40) {
        let f = random_field(modes, 1.0, 2.0, a);
        let g = random_field(modes, 1.0, 2.0, b);
        let c = Convolver::new(modes, true);
        let fg = c.product(&f, &g);
        let gf = c.product(&g, &f);
        let exact = convolve_direct(&f, &g).unwrap();
        let scale = f.sup_bound() * g.sup_bound();
        prop_assert!(fg.sub(&gf).unwrap().sobolev_norm(h(0.0)) <= 1e-14 * scale);
        prop_assert!(fg.sub(&exact).unwrap().sobolev_norm(h(0.0)) <= 1e-13 * scale);
    }

    #[test]
    fn linear_flow_is_unitary_and_a_group(seed in 0u64..500, ti in -192i32..192, si in -192i32..192) {
        // Dyadic times keep `t + s` exact; phases reach 10^8 at the top mode.
        let (t, s) = (ti as f64 / 64.0, si as f64 / 64.0);
        let fam = EquationFamily::kawahara(0.5, 0.1).unwrap();
        let u = random_field(32, 1.0, 3.0, seed);
        let sym = fam.symbol();
        let ut = sym.apply_linear(t, &u);
        prop_assert!((ut.sobolev_norm(h(2.0)) - u.sobolev_norm(h(2.0))).abs() <= 1e-13 * u.sobolev_norm(h(2.0)));
        let two_step = sym.apply_linear(s, &ut);
        let one_step = sym.apply_linear(t + s, &u);
        prop_assert!(two_step.sub(&one_step).unwrap().sobolev_norm(h(0.0)) <= 1e-12);
    }

    #[test]
    fn reduced_angles_lie_in_one_turn(a in -1e9f64..1e9, t in 0.0f64..4.0) {
        let r = reduced_angle(a, t);
        prop_assert!(r.abs() <= std::f64::consts::PI + 1e-9);
        let turns = (a * t - r) / std::f64::consts::TAU;
        prop_assert!((turns - turns.round()).abs() < 1e-6);
    }

    #[test]
    fn reduced_angles_match_moderate_products(a in -1e4f64..1e4, t in 0.0f64..4.0) {
        let r = reduced_angle(a, t);
        prop_assert!((r.sin() - (a * t).sin()).abs() < 1e-11);
        prop_assert!((r.cos() - (a * t).cos()).abs() < 1e-11);
    }
}
