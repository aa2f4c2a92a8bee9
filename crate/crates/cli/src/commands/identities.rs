use dispersive_core::duhamel::phase::{denominator_bounds, scan_identities, BoundEntry, DenominatorBounds, IdentityScan};
use serde::Serialize;

use super::usage;
use crate::config::settings;
use crate::output::Output;
use crate::CliError;

settings! {
    Args => Config {
        kmax "kmax": i64 = 500, "scan |k|, |j| up to this bound";
        theta "theta": f64 = 0.5, "Kawahara θ for the shifted denominator";
    }
}

#[derive(Serialize)]
struct Result {
    identities: IdentityScan,
    bounds: DenominatorBounds,
}

#[derive(Serialize)]
struct BoundRow {
    ratio: &'static str,
    max: f64,
    bound: f64,
    k: i64,
    j: i64,
    pass: bool,
}

fn row(ratio: &'static str, e: BoundEntry) -> BoundRow {
    BoundRow {
        ratio,
        max: e.max,
        bound: e.bound,
        k: e.argmax.0,
        j: e.argmax.1,
        pass: e.passes(),
    }
}

pub fn run(cfg: &Config, out: &Output) -> std::result::Result<bool, CliError> {
    if cfg.kmax < 2 {
        return Err(usage("kmax must be at least 2"));
    }
    if !cfg.theta.is_finite() {
        return Err(usage("theta must be finite"));
    }
    let identities = scan_identities(cfg.kmax);
    let bounds = denominator_bounds(cfg.kmax, cfg.theta);
    let pass = identities.failures == 0 && identities.positivity_failures == 0 && bounds.passes();
    let rows = [
        row("k^2/sigma", bounds.k2_over_sigma),
        row("k^4/tau", bounds.k4_over_tau),
        row("k^3/(j(k-j)sigma)", bounds.k3_over_j_kj_sigma),
        row("k^2/(kj(k-j))", bounds.k2_over_kdv),
        row("k^2/(sigma+3theta/5)", bounds.k2_over_sigma_plus),
        row("k^2/(sigma-3theta/5)", bounds.k2_over_sigma_minus),
    ];
    out.csv("bounds.csv", &rows)?;
    out.report("identities.json", "identities", cfg, pass, &Result { identities, bounds })?;
    println!(
        "identities: {} pairs, {} failures, {} positivity failures; bounds {}",
        identities.pairs_checked,
        identities.failures,
        identities.positivity_failures,
        if bounds.passes() { "hold" } else { "VIOLATED" }
    );
    Ok(pass)
}
