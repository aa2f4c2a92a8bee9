//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dispersive_core::duhamel::compare_routes;
use dispersive_core::duhamel::phase::{denominator_bounds, scan_identities};
use dispersive_core::duhamel::smoothing::{lemma_scaling, smoothing_report, LemmaIndices};
use dispersive_core::evolution::{conserved_diagnostics, max_l2_drift, solve, SolverConfig};
use dispersive_core::fixedpoint::{contraction_scan, iterate_k, period_sweep, ContractionSetup};
use dispersive_core::smalldivisor::{build_excluded_set, ExcludedSet};
use dispersive_core::spectrum::{random_field, Profile};
use dispersive_core::stats::geometric_ladder;
use dispersive_core::{EquationFamily, SobolevIndex};

type Outcome = Result<String, String>;

fn families() -> Vec<EquationFamily> {
    vec![
        EquationFamily::fifth(0.0),
        EquationFamily::kawahara(0.5, 0.0).expect("θ = 1/2 is admissible"),
        EquationFamily::seventh(0.0),
        EquationFamily::kdv(0.0),
    ]
}

fn excluded_set(f: &EquationFamily) -> Result<ExcludedSet, String> {
    let w = f.witness().map_err(|e| e.to_string())?;
    build_excluded_set(f.symbol(), &w, 1.0, 2.0, 1.5, 0.1, 128).map_err(|e| e.to_string())
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn phase_identities() -> Outcome {
    let start = Instant::now();
    let scan = scan_identities(500);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        scan.failures == 0 && scan.positivity_failures == 0 && secs < 5.0,
        format!(
            "{} pairs, {} failures, {} positivity failures, {secs:.2} s",
            scan.pairs_checked, scan.failures, scan.positivity_failures
        ),
    )
}

fn denominators() -> Outcome {
    let b = denominator_bounds(500, 0.5);
    let entries = [
        ("k²/σ", b.k2_over_sigma),
        ("k⁴/τ", b.k4_over_tau),
        ("k³/(j(k-j)σ)", b.k3_over_j_kj_sigma),
        ("k²/(kj(k-j))", b.k2_over_kdv),
        ("k²/(σ+3θ/5)", b.k2_over_sigma_plus),
    ];
    let detail = entries
        .iter()
        .map(|(n, e)| format!("{n} {:.4}/{}", e.max, e.bound))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(b.passes() && entries.iter().all(|(_, e)| e.passes()), detail)
}

fn small_divisors() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for f in families() {
        let set = excluded_set(&f)?;
        let periods = set.sample_periods(100, 42).map_err(|e| e.to_string())?;
        let failures = periods.iter().filter(|&&t| !set.certify_bound(t, 128).pass).count();
        let c1 = 2f64.sqrt() / (set.c0 * set.ratio_inf);
        let c1_ok = (set.c1 - c1).abs() <= 1e-12 * c1;
        ok &= set.removed_measure <= set.delta
            && periods.len() == 100
            && failures == 0
            && c1_ok
            && set.uncertified_tail < 0.01;
        parts.push(format!(
            "{f}: removed {:.2e}, tail {:.2e}, {failures} failures",
            set.removed_measure, set.uncertified_tail
        ));
    }
    verdict(ok, parts.join("; "))
}

fn inverse_factor() -> Outcome {
    let mut worst: f64 = 0.0;
    for f in families() {
        let set = excluded_set(&f)?;
        let periods = set.sample_periods(20, 7).map_err(|e| e.to_string())?;
        for (seed, &t) in periods.iter().enumerate() {
            let u = random_field(64, 1.0, 2.0, seed as u64);
            let back = f
                .symbol()
                .apply_inverse_factor(t, &f.symbol().apply_one_minus_linear(t, &u))
                .map_err(|e| e.to_string())?;
            let l2 = SobolevIndex::new(0.0).unwrap();
            worst = worst.max(back.sub(&u).unwrap().sobolev_norm(l2) / u.sobolev_norm(l2));
        }
    }
    verdict(worst <= 1e-12, format!("worst relative error {worst:.2e} over 20 seeds per family"))
}

fn richardson_order(f: &EquationFamily, dts: [f64; 3]) -> Result<f64, String> {
    let u0 = Profile::Cos { mode: 1 }.field(64, 0.1).map_err(|e| e.to_string())?;
    let finals = dts
        .iter()
        .map(|&dt| solve(&u0, f, 1.0, &SolverConfig::new(64, dt)).map(|t| t.final_u()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let l2 = SobolevIndex::new(0.0).unwrap();
    let e1 = finals[0].sub(&finals[1]).unwrap().sobolev_norm(l2);
    let e2 = finals[1].sub(&finals[2]).unwrap().sobolev_norm(l2);
    Ok((e1 / e2).log2())
}

fn solver_validation() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for f in families() {
        let linear = f.with_nonlinear_coefficient(0.0);
        let u0 = random_field(64, 1e-2, 12.0, 3);
        let traj = solve(&u0, &linear, 1.0, &SolverConfig::new(64, 1e-3)).map_err(|e| e.to_string())?;
        let exact = f.symbol().apply_linear(1.0, &u0);
        let l2 = SobolevIndex::new(0.0).unwrap();
        let lin_err = traj.final_u().sub(&exact).unwrap().sobolev_norm(l2) / u0.sobolev_norm(l2);

        // The triplet must sit between the roundoff floor and the onset of
        // the fastest resolved phases, which moves with the leading order.
        let dts = if f.symbol().leading_order() == 3 {
            [4e-3, 2e-3, 1e-3]
        } else {
            [1e-3, 5e-4, 2.5e-4]
        };
        let order = richardson_order(&f, dts)?;

        let traj = solve(&u0, &f, 1.0, &SolverConfig::new(64, 1e-3)).map_err(|e| e.to_string())?;
        let mean = conserved_diagnostics(&traj).iter().map(|r| r.mean.abs()).fold(0.0, f64::max);
        let drift = max_l2_drift(&traj);
        ok &= lin_err <= 1e-12 && (3.7..=4.3).contains(&order) && mean <= 1e-14 && drift <= 1e-8;
        parts.push(format!(
            "{f}: linear {lin_err:.1e}, order {order:.3}, mean {mean:.1e}, L² drift {drift:.1e}"
        ));
    }
    verdict(ok, parts.join("; "))
}

fn normal_form_equivalence() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for f in families() {
        let start = Instant::now();
        let u0 = Profile::Cos { mode: 1 }.field(64, 1e-2).map_err(|e| e.to_string())?;
        let (_, _, cmp) = compare_routes(&u0, &f, 1.0, &SolverConfig::new(64, 1e-3)).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        ok &= cmp.relative_h4 <= 1e-6 && secs < 300.0;
        parts.push(format!("{f}: {:.2e} in {secs:.1} s", cmp.relative_h4));
    }
    verdict(ok, parts.join("; "))
}

fn smoothing() -> Outcome {
    let ladder = geometric_ladder(1e-2, 1e-3, 4);
    let mut ok = true;
    let mut parts = Vec::new();
    for f in families() {
        let r = smoothing_report(
            &f,
            f.smoothing_indices(),
            1.0,
            &ladder,
            Profile::Cos { mode: 1 },
            &SolverConfig::new(64, 1e-3),
        )
        .map_err(|e| e.to_string())?;
        let spread = r.ratio_spread.unwrap_or(f64::INFINITY);
        let slope = r.exponent.map_or(f64::NAN, |e| e.slope);
        // KdV's estimate carries a second norm, so only its ratio is pinned.
        let slope_ok = f.symbol().leading_order() == 3 || (slope - 2.0).abs() <= 0.1;
        ok &= r.is_complete() && slope_ok && spread < 2.0;
        parts.push(format!("{f}: exponent {slope:.4}, spread {spread:.4}"));
    }
    verdict(ok, parts.join("; "))
}

fn contraction() -> Outcome {
    let ladder = geometric_ladder(1e-3, 1e-4, 4);
    let cfg = SolverConfig::new(64, 1e-3);
    let mut ok = true;
    let mut parts = Vec::new();
    for f in families() {
        let set = excluded_set(&f)?;
        let setup = ContractionSetup::new(f.contraction_index());
        let sweep = period_sweep(&f, &set, 20, 1e-3, &setup, &cfg, 42).map_err(|e| e.to_string())?;
        let max_factor = sweep.iter().map(|r| r.factor).fold(0.0, f64::max);
        let period = sweep.first().ok_or("empty sweep")?.period;
        let scan = contraction_scan(&f, period, &set, &ladder, &setup, &cfg).map_err(|e| e.to_string())?;
        let slope = scan.slope.map_or(f64::NAN, |s| s.slope);
        let u0 = setup.profile.field(64, 1e-3).map_err(|e| e.to_string())?;
        let it = iterate_k(&u0, &f, period, &set, 50, setup.s, &cfg).map_err(|e| e.to_string())?;
        ok &= sweep.len() == 20
            && sweep.iter().all(|r| r.factor < 1.0)
            && scan.is_complete()
            && (slope - 1.0).abs() <= 0.15
            && it.converged;
        parts.push(format!(
            "{f}: max factor {max_factor:.2e}, slope {slope:.4}, converged in {} iterations",
            it.norms.len() - 1
        ));
    }
    verdict(ok, parts.join("; "))
}

fn lemma_scalings() -> Outcome {
    let f = EquationFamily::fifth(0.0);
    let r = lemma_scaling(
        &f,
        LemmaIndices::default(),
        1.0,
        &geometric_ladder(1e-2, 1e-3, 4),
        Profile::Random { decay: 12.0, seed: 1 },
        64,
    )
    .map_err(|e| e.to_string())?;
    verdict(
        (r.b_fit.slope - 2.0).abs() <= 0.05 && (r.r_fit.slope - 3.0).abs() <= 0.05,
        format!("B exponent {:.4}, R exponent {:.4}", r.b_fit.slope, r.r_fit.slope),
    )
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).expect("readable output dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).expect("readable file"));
            }
        }
    }
    out
}

fn run_suite(dir: &Path, threads: Option<&str>) -> Result<(), String> {
    let runs: [&[&str]; 6] = [
        &["identities", "--kmax", "100"],
        &["divisor"],
        &["simulate", "--T", "0.2"],
        &["duhamel", "--T", "0.5"],
        &["smoothing"],
        &["contract", "--sweep", "true", "--count", "3"],
    ];
    for args in runs {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_dispersive"));
        cmd.arg("--out-dir").arg(dir).args(args).env_remove("DISPERSIVE_OUT_DIR");
        if let Some(n) = threads {
            cmd.args(["--threads", n]);
        }
        let out = cmd.output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{} exited with {}", args[0], out.status));
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_suite(a.path(), Some("1"))?;
    run_suite(b.path(), None)?;
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    let differing: Vec<&String> = ta.keys().filter(|k| ta.get(*k) != tb.get(*k)).collect();
    verdict(
        ta.len() == tb.len() && differing.is_empty(),
        format!("{} files compared, {} differ {:?}", ta.len(), differing.len(), differing),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("phase identities", phase_identities),
        ("denominator bounds", denominators),
        ("small-divisor construction", small_divisors),
        ("inverse-factor round trip", inverse_factor),
        ("solver validation", solver_validation),
        ("normal-form equivalence", normal_form_equivalence),
        ("smoothing scaling", smoothing),
        ("contraction", contraction),
        ("B/R lemma scalings", lemma_scalings),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
