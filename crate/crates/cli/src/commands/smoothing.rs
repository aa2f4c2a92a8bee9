use dispersive_core::duhamel::smoothing::{
    gain_ladder, lemma_scaling, smoothing_report, GainRow, LemmaIndices, LemmaReport, SmoothingReport,
};
use dispersive_core::family::SmoothingIndices;
use dispersive_core::stats::geometric_ladder;
use serde::Serialize;

use super::{family, profile, solver};
use crate::config::{settings, List};
use crate::output::Output;
use crate::CliError;

settings! {
    Args => Config {
        family "family": String = "fifth(0)".into(), "family preset";
        omega "omega": Option<f64> = None, "override ω (fifth)";
        theta "theta": Option<f64> = None, "override θ (kawahara)";
        alpha "alpha": Option<f64> = None, "override α";
        ladder "ladder": List<f64> = List(geometric_ladder(1e-2, 1e-3, 4)), "decreasing amplitudes";
        s "s": Option<f64> = None, "base index [default: family]";
        p "p": Option<f64> = None, "gain [default: family]";
        p_tilde "p-tilde": Option<f64> = None, "extra smallness index [default: family]";
        q "q": Option<f64> = None, "smallness power [default: family]";
        period "T": f64 = 1.0, "time of the Duhamel term";
        data "data": String = "cos".into(), "cos or random";
        mode "mode": usize = 1, "wavenumber of cos data";
        decay "decay": f64 = 12.0, "spectral decay of random data";
        seed "seed": u64 = 1, "random data seed";
        modes "K": usize = 64, "Fourier truncation";
        dt "dt": f64 = 1e-3, "time step";
        exponent_tol "exponent-tol": f64 = 0.1, "allowed deviation of the fitted exponent from 2";
        spread_max "spread-max": f64 = 2.0, "allowed max/min ratio";
        lemma_s "lemma-s": f64 = 4.0, "index for the B and R scalings";
        gain_modes "gain-modes": List<usize> = List(vec![8, 16, 32, 64]), "truncations of the gain ladder";
        gain_decay "gain-decay": f64 = 7.0, "decay of the gain-ladder data";
    }
}

#[derive(Serialize)]
struct Result<'a> {
    smoothing: &'a SmoothingReport,
    lemmas: &'a LemmaReport,
    gain: &'a [GainRow],
}

pub fn run(cfg: &Config, out: &Output) -> std::result::Result<bool, CliError> {
    let fam = family(&cfg.family, cfg.omega, cfg.theta, cfg.alpha)?;
    let prof = profile(&cfg.data, cfg.mode, cfg.decay, cfg.seed)?;
    let scfg = solver(cfg.modes, cfg.dt)?;
    let d = fam.smoothing_indices();
    let indices = SmoothingIndices {
        s: cfg.s.unwrap_or(d.s),
        p: cfg.p.unwrap_or(d.p),
        p_tilde: cfg.p_tilde.unwrap_or(d.p_tilde),
        q: cfg.q.unwrap_or(d.q),
    };
    let report = smoothing_report(&fam, indices, cfg.period, &cfg.ladder.0, prof, &scfg)?;
    let lemma_idx = LemmaIndices {
        s: cfg.lemma_s,
        ..LemmaIndices::default()
    };
    let lemmas = lemma_scaling(&fam, lemma_idx, cfg.period, &cfg.ladder.0, prof, cfg.modes)?;
    let gain = gain_ladder(&fam, lemma_idx, cfg.period, &cfg.gain_modes.0, cfg.ladder.0[0], cfg.gain_decay, cfg.seed)?;

    out.csv("smoothing.csv", &report.rows)?;
    out.csv("lemmas.csv", &lemmas.rows)?;
    out.csv("gain.csv", &gain)?;
    let pass = report.is_complete()
        && report.exponent.is_some_and(|f| (f.slope - 2.0).abs() <= cfg.exponent_tol)
        && report.ratio_spread.is_some_and(|r| r < cfg.spread_max);
    out.report(
        "smoothing.json",
        "smoothing",
        cfg,
        pass,
        &Result {
            smoothing: &report,
            lemmas: &lemmas,
            gain: &gain,
        },
    )?;
    match (&report.failure, report.exponent, report.ratio_spread) {
        (Some(f), _, _) => println!("smoothing: {fam}: ladder aborted, {f}"),
        (None, Some(e), Some(r)) => println!(
            "smoothing: {fam}: exponent {:.4} ± {:.1e}, ratio spread {r:.4}",
            e.slope, e.slope_stderr
        ),
        _ => println!("smoothing: {fam}: no fit"),
    }
    Ok(pass)
}
