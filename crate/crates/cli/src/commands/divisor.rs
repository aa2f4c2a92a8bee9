use dispersive_core::smalldivisor::{build_excluded_set, CertifyReport, ExcludedSet, ModeSummary};
use dispersive_core::symbols::{check_hypotheses, HypothesesWitness, LinearSymbol, SymbolFamily};
use dispersive_core::FamilyRegistry;
use serde::Serialize;

use super::usage;
use crate::config::settings;
use crate::output::Output;
use crate::CliError;

settings! {
    Args => Config {
        symbol "symbol": String = "fifth(0)".into(), "family preset or [[alpha, r], ...] pairs";
        t1 "t1": f64 = 1.0, "window start";
        t2 "t2": f64 = 2.0, "window end";
        p "p": f64 = 1.5, "divisor exponent, > 1";
        delta "delta": f64 = 0.1, "removed-measure budget";
        kmax "kmax": u64 = 128, "largest mode with removed intervals";
        samples "samples": usize = 100, "certified periods to sample";
        seed "seed": u64 = 42, "sampling seed";
    }
}

/// Scan limit for the hypotheses check on raw symbols.
const HYPOTHESES_SCAN: u64 = 256;

pub fn symbol_and_witness(spec: &str) -> std::result::Result<(LinearSymbol, HypothesesWitness), CliError> {
    if spec.trim_start().starts_with('[') {
        let symbol = LinearSymbol::from_json_pairs(spec)?;
        let family = SymbolFamily::from_symbol(&symbol);
        let witness = check_hypotheses(&family, HYPOTHESES_SCAN)?.witness()?;
        Ok((symbol, witness))
    } else {
        let family = FamilyRegistry::global().preset(spec)?;
        Ok((family.symbol().clone(), family.witness()?))
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    c0: f64,
    c1: f64,
    removed_measure: f64,
    uncertified_tail: f64,
    p_series: f64,
    leading_order: u32,
    ratio_inf: f64,
    ratio_sup: f64,
    interval_count: u64,
    witness: &'a HypothesesWitness,
    certified: usize,
    failures: usize,
    /// One entry per mode; individual intervals are in intervals.csv form.
    intervals: &'a [ModeSummary],
}

#[derive(Serialize)]
struct PeriodRow {
    period: f64,
    max_scaled: Option<f64>,
    argmax: Option<i64>,
    c1: f64,
    pass: bool,
}

impl From<&CertifyReport> for PeriodRow {
    fn from(r: &CertifyReport) -> Self {
        Self {
            period: r.period,
            max_scaled: r.max_scaled,
            argmax: r.argmax,
            c1: r.c1,
            pass: r.pass,
        }
    }
}

pub fn build(cfg: &Config) -> std::result::Result<(ExcludedSet, HypothesesWitness), CliError> {
    let (symbol, witness) = symbol_and_witness(&cfg.symbol)?;
    if cfg.kmax == 0 {
        return Err(usage("kmax must be at least 1"));
    }
    let set = build_excluded_set(&symbol, &witness, cfg.t1, cfg.t2, cfg.p, cfg.delta, cfg.kmax)?;
    Ok((set, witness))
}

pub fn run(cfg: &Config, out: &Output) -> std::result::Result<bool, CliError> {
    let (set, witness) = build(cfg)?;
    let periods = set.sample_periods(cfg.samples, cfg.seed)?;
    let reports: Vec<CertifyReport> = {
        use rayon::prelude::*;
        periods.par_iter().map(|&t| set.certify_bound(t, cfg.kmax)).collect()
    };
    let failures = reports.iter().filter(|r| !r.pass).count();
    let pass = set.removed_measure <= set.delta && failures == 0;
    let rows: Vec<PeriodRow> = reports.iter().map(PeriodRow::from).collect();
    out.csv("periods.csv", &rows)?;
    out.csv("intervals.csv", set.mode_summaries())?;
    let summary = Summary {
        c0: set.c0,
        c1: set.c1,
        removed_measure: set.removed_measure,
        uncertified_tail: set.uncertified_tail,
        p_series: set.p_series,
        leading_order: set.leading_order,
        ratio_inf: set.ratio_inf,
        ratio_sup: set.ratio_sup,
        interval_count: set.interval_count(),
        witness: &witness,
        certified: reports.len() - failures,
        failures,
        intervals: set.mode_summaries(),
    };
    out.report("divisor.json", "divisor", cfg, pass, &summary)?;
    println!(
        "divisor: c0 = {:.6e}, c1 = {:.6e}, removed {:.6e} (budget {}), tail {:.3e}, {}/{} periods certified",
        set.c0,
        set.c1,
        set.removed_measure,
        set.delta,
        set.uncertified_tail,
        reports.len() - failures,
        reports.len()
    );
    Ok(pass)
}
