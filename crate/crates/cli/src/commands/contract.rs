use dispersive_core::fixedpoint::{
    contraction_scan, iterate_k, period_sweep, ContractionReport, ContractionSetup, DuhamelRoute, SweepRow,
};
use dispersive_core::smalldivisor::{build_excluded_set, ExcludedSet};
use dispersive_core::stats::geometric_ladder;
use serde::Serialize;

use super::divisor::symbol_and_witness;
use super::{family, profile, solver, usage};
use crate::config::{settings, List};
use crate::output::Output;
use crate::CliError;

settings! {
    Args => Config {
        family "family": String = "fifth(0)".into(), "family preset";
        omega "omega": Option<f64> = None, "override ω (fifth)";
        theta "theta": Option<f64> = None, "override θ (kawahara)";
        alpha "alpha": Option<f64> = None, "override α";
        period "t": Option<f64> = None, "certified period for the ladder scan";
        sweep "sweep": bool = false, "sample certified periods";
        count "count": usize = 20, "periods in the sweep";
        seed "seed": u64 = 42, "sweep sampling seed";
        amplitude "amplitude": f64 = 1e-3, "sweep amplitude";
        ladder "amplitude-ladder": List<f64> = List(geometric_ladder(1e-3, 1e-4, 4)), "decreasing amplitudes";
        s "s": Option<f64> = None, "norm index [default: family]";
        iterations "iterations": usize = 50, "Picard iterations";
        route "route": String = "direct".into(), "direct or normal-form";
        t1 "t1": f64 = 1.0, "window start";
        t2 "t2": f64 = 2.0, "window end";
        p "p": f64 = 1.5, "divisor exponent";
        delta "delta": f64 = 0.1, "removed-measure budget";
        kmax "kmax": u64 = 128, "largest mode with removed intervals";
        data "data": String = "cos".into(), "cos or random";
        mode "mode": usize = 1, "wavenumber of cos data";
        decay "decay": f64 = 12.0, "spectral decay of random data";
        data_seed "data-seed": u64 = 1, "random data seed";
        modes "K": usize = 64, "Fourier truncation";
        dt "dt": f64 = 1e-3, "time step";
    }
}

#[derive(Serialize)]
struct SetSummary {
    c0: f64,
    c1: f64,
    removed_measure: f64,
    uncertified_tail: f64,
}

#[derive(Serialize)]
struct Result<'a> {
    excluded_set: SetSummary,
    scan: &'a ContractionReport,
    sweep: Option<&'a [SweepRow]>,
    /// Only finitely many periods and amplitudes are tested; contraction on
    /// them says nothing about periods that were not sampled.
    caveat: &'static str,
}

#[derive(Serialize)]
struct SweepCsv {
    period: f64,
    factor: f64,
    gap: f64,
    nearest_k: i64,
    nearest_n: i64,
    nearest_center: f64,
    nearest_radius: f64,
    dominant_mode: i64,
    dominant_gap: f64,
}

impl From<&SweepRow> for SweepCsv {
    fn from(r: &SweepRow) -> Self {
        Self {
            period: r.period,
            factor: r.factor,
            gap: r.gap,
            nearest_k: r.nearest.k,
            nearest_n: r.nearest.n,
            nearest_center: r.nearest.center,
            nearest_radius: r.nearest.radius,
            dominant_mode: r.dominant_mode,
            dominant_gap: r.dominant_gap,
        }
    }
}

fn route(name: &str) -> std::result::Result<DuhamelRoute, CliError> {
    match name {
        "direct" => Ok(DuhamelRoute::Direct),
        "normal-form" | "normal_form" => Ok(DuhamelRoute::NormalForm),
        other => Err(usage(format!("route must be direct or normal-form, got '{other}'"))),
    }
}

pub fn run(cfg: &Config, out: &Output) -> std::result::Result<bool, CliError> {
    let fam = family(&cfg.family, cfg.omega, cfg.theta, cfg.alpha)?;
    let prof = profile(&cfg.data, cfg.mode, cfg.decay, cfg.data_seed)?;
    let scfg = solver(cfg.modes, cfg.dt)?;
    if cfg.period.is_none() && !cfg.sweep {
        return Err(usage("give --t or --sweep true"));
    }
    let (_, witness) = symbol_and_witness(&fam.to_string())?;
    let set: ExcludedSet = build_excluded_set(fam.symbol(), &witness, cfg.t1, cfg.t2, cfg.p, cfg.delta, cfg.kmax)?;
    let setup = ContractionSetup {
        route: route(&cfg.route)?,
        ..ContractionSetup::new(cfg.s.unwrap_or(fam.contraction_index())).with_profile(prof)
    };

    let sweep = if cfg.sweep {
        let rows = period_sweep(&fam, &set, cfg.count, cfg.amplitude, &setup, &scfg, cfg.seed)?;
        out.csv("sweep.csv", &rows.iter().map(SweepCsv::from).collect::<Vec<_>>())?;
        Some(rows)
    } else {
        None
    };
    let period = match (cfg.period, &sweep) {
        (Some(t), _) => t,
        (None, Some(rows)) if !rows.is_empty() => rows[0].period,
        _ => return Err(usage("the sweep sampled no periods; give --t")),
    };

    let mut scan = contraction_scan(&fam, period, &set, &cfg.ladder.0, &setup, &scfg)?;
    if scan.is_complete() {
        let u0 = prof.field(cfg.modes, cfg.ladder.0[0])?;
        scan.iteration = Some(iterate_k(&u0, &fam, period, &set, cfg.iterations, setup.s, &scfg)?);
    }
    out.csv("ladder.csv", &scan.rows)?;

    let sweep_ok = sweep.as_ref().map_or(true, |rows| rows.iter().all(|r| r.factor < 1.0));
    let pass = scan.is_complete()
        && scan.all_contract()
        && scan.iteration.as_ref().is_some_and(|it| it.converged)
        && sweep_ok;
    let result = Result {
        excluded_set: SetSummary {
            c0: set.c0,
            c1: set.c1,
            removed_measure: set.removed_measure,
            uncertified_tail: set.uncertified_tail,
        },
        scan: &scan,
        sweep: sweep.as_deref(),
        caveat: "contraction is checked on sampled periods and amplitudes only",
    };
    out.report("contract.json", "contract", cfg, pass, &result)?;
    let max_factor = scan.rows.iter().map(|r| r.factor).fold(0.0, f64::max);
    println!(
        "contract: {fam} at T = {period}: max factor {max_factor:.3e}{}{}",
        scan.slope.map(|f| format!(", slope {:.4}", f.slope)).unwrap_or_default(),
        sweep
            .as_ref()
            .map(|rows| format!(", sweep {}/{} contracting", rows.iter().filter(|r| r.factor < 1.0).count(), rows.len()))
            .unwrap_or_default()
    );
    Ok(pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn route_names() {
        assert_eq!(route("direct").unwrap(), DuhamelRoute::Direct);
        assert_eq!(route("normal-form").unwrap(), DuhamelRoute::NormalForm);
        assert!(route("both").is_err());
    }
}
