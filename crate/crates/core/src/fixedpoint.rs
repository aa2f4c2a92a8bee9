//! The operator `K(T) = (I - S_L(T))^{-1} S_D(T)`.
//!
//! A `T`-periodic solution with data `u0` is a fixed point of `K(T)`. When the
//! factor `‖K(T)u0‖_s / ‖u0‖_s` stays below one on a ball, zero is the only
//! fixed point there. Everything here is empirical: a finite sample of
//! periods and amplitudes, not a universal statement over the period set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duhamel::{duhamel_direct, duhamel_normalform};
use crate::error::{Error, Result};
use crate::evolution::SolverConfig;
use crate::family::EquationFamily;
use crate::smalldivisor::{ExcludedInterval, ExcludedSet, Membership};
use crate::spectrum::{FourierField, Profile, SobolevIndex};
use crate::stats::{check_ladder, loglog_fit, LogLogFit};

/// Which computation of `S_D(T)` feeds `K(T)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuhamelRoute {
    #[default]
    Direct,
    NormalForm,
}

/// Iterations stop as converged below this `H^s` norm.
pub const CONVERGED_NORM: f64 = 1e-12;
/// Iterations stop as diverged above this multiple of the initial norm.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

fn certify(family: &EquationFamily, period: f64, set: &ExcludedSet) -> Result<()> {
    if set.symbol != *family.symbol() {
        return Err(Error::InvalidParameter {
            name: "excluded set",
            reason: format!("built for a different symbol than {family}"),
        });
    }
    match set.contains(period) {
        Membership::InWTruncated => Ok(()),
        _ => Err(Error::UncertifiedPeriod { period }),
    }
}

/// `K(T)u0` for a period certified by `set`.
pub fn apply_k(
    u0: &FourierField,
    family: &EquationFamily,
    period: f64,
    set: &ExcludedSet,
    route: DuhamelRoute,
    cfg: &SolverConfig,
) -> Result<FourierField> {
    certify(family, period, set)?;
    if u0.is_zero() {
        return Ok(FourierField::zeros(u0.modes()));
    }
    let sd = match route {
        DuhamelRoute::Direct => duhamel_direct(u0, family, period, cfg)?,
        DuhamelRoute::NormalForm => duhamel_normalform(u0, family, period, cfg)?.field,
    };
    family.symbol().apply_inverse_factor(period, &sd)
}

pub fn contraction_factor(u0: &FourierField, ku0: &FourierField, s: SobolevIndex) -> f64 {
    ku0.sobolev_norm(s) / u0.sobolev_norm(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub amplitude: f64,
    pub norm_u0: f64,
    pub norm_ku0: f64,
    pub factor: f64,
}

/// Amplitude interval bracketing the first factor `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// Largest amplitude seen with factor `< 1`.
    pub contracting: Option<f64>,
    /// Smallest amplitude seen with factor `>= 1`; absent when every tested
    /// amplitude contracts.
    pub non_contracting: Option<f64>,
    pub bisection_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub family: String,
    pub period: f64,
    pub s: f64,
    pub profile: Profile,
    pub route: DuhamelRoute,
    pub rows: Vec<ContractionRow>,
    /// Fit of factor against amplitude.
    pub slope: Option<LogLogFit>,
    pub threshold: Option<ThresholdEstimate>,
    pub iteration: Option<IterationReport>,
    pub failure: Option<String>,
}

impl ContractionReport {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn all_contract(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.factor < 1.0)
    }
}

/// Settings shared by the contraction experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionSetup {
    pub s: f64,
    pub profile: Profile,
    pub route: DuhamelRoute,
    pub bisection_steps: usize,
}

impl ContractionSetup {
    pub fn new(s: f64) -> Self {
        Self {
            s,
            profile: Profile::default(),
            route: DuhamelRoute::Direct,
            bisection_steps: 6,
        }
    }

    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.profile = profile;
        self
    }
}

fn contraction_row(
    family: &EquationFamily,
    period: f64,
    set: &ExcludedSet,
    setup: &ContractionSetup,
    amplitude: f64,
    cfg: &SolverConfig,
) -> Result<ContractionRow> {
    let s = SobolevIndex::new(setup.s)?;
    let u0 = setup.profile.field(cfg.modes, amplitude)?;
    let ku0 = apply_k(&u0, family, period, set, setup.route, cfg)?;
    let norm_u0 = u0.sobolev_norm(s);
    let norm_ku0 = ku0.sobolev_norm(s);
    Ok(ContractionRow {
        amplitude,
        norm_u0,
        norm_ku0,
        factor: norm_ku0 / norm_u0,
    })
}

/// Contraction factors along a decreasing amplitude ladder, with a log-log
/// slope and a bisected threshold bracket when the ladder straddles one.
pub fn contraction_scan(
    family: &EquationFamily,
    period: f64,
    set: &ExcludedSet,
    ladder: &[f64],
    setup: &ContractionSetup,
    cfg: &SolverConfig,
) -> Result<ContractionReport> {
    check_ladder(ladder)?;
    cfg.validate()?;
    SobolevIndex::new(setup.s)?;
    certify(family, period, set)?;

    let results: Vec<Result<ContractionRow>> = ladder
        .par_iter()
        .map(|&a| contraction_row(family, period, set, setup, a, cfg))
        .collect();
    let mut rows = Vec::with_capacity(ladder.len());
    let mut failure = None;
    for (a, r) in ladder.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure = Some(format!("amplitude {a:e}: {e}"));
                break;
            }
        }
    }

    let mut report = ContractionReport {
        family: family.to_string(),
        period,
        s: setup.s,
        profile: setup.profile,
        route: setup.route,
        rows,
        slope: None,
        threshold: None,
        iteration: None,
        failure,
    };
    if !report.is_complete() {
        return Ok(report);
    }
    let x: Vec<f64> = report.rows.iter().map(|r| r.amplitude).collect();
    let y: Vec<f64> = report.rows.iter().map(|r| r.factor).collect();
    report.slope = loglog_fit(&x, &y).ok();
    report.threshold = Some(bisect_threshold(family, period, set, setup, &report.rows, cfg));
    Ok(report)
}

fn bisect_threshold(
    family: &EquationFamily,
    period: f64,
    set: &ExcludedSet,
    setup: &ContractionSetup,
    rows: &[ContractionRow],
    cfg: &SolverConfig,
) -> ThresholdEstimate {
    let mut good = rows
        .iter()
        .filter(|r| r.factor < 1.0)
        .map(|r| r.amplitude)
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
    let mut bad = rows
        .iter()
        .filter(|r| r.factor >= 1.0 && good.map_or(true, |g| r.amplitude > g))
        .map(|r| r.amplitude)
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.min(a))));
    let mut steps = 0;
    if let (Some(_), Some(_)) = (good, bad) {
        for _ in 0..setup.bisection_steps {
            let (g, b) = (good.expect("set"), bad.expect("set"));
            let mid = (g * b).sqrt();
            steps += 1;
            match contraction_row(family, period, set, setup, mid, cfg) {
                Ok(r) if r.factor < 1.0 => good = Some(mid),
                // A solver failure counts as not contracting.
                _ => bad = Some(mid),
            }
        }
    }
    ThresholdEstimate {
        contracting: good,
        non_contracting: bad,
        bisection_steps: steps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    /// `‖u_n‖_s` for `n = 0, 1, ...`.
    pub norms: Vec<f64>,
    pub converged: bool,
    pub diverged: bool,
    /// Why the iteration diverged, when it did.
    pub reason: Option<String>,
}

impl IterationReport {
    /// `‖u_{n+1}‖ / ‖u_n‖` for consecutive nonzero norms.
    pub fn ratios(&self) -> Vec<f64> {
        self.norms
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Picard iteration `u_{n+1} = K(T) u_n`, stopping at convergence,
/// divergence or after `n_iter` steps. Iterates stay mean-zero and Hermitian
/// because every field is rebuilt from its positive modes.
pub fn iterate_k(
    u0: &FourierField,
    family: &EquationFamily,
    period: f64,
    set: &ExcludedSet,
    n_iter: usize,
    s: f64,
    cfg: &SolverConfig,
) -> Result<IterationReport> {
    certify(family, period, set)?;
    let s = SobolevIndex::new(s)?;
    let first = u0.sobolev_norm(s);
    let mut norms = vec![first];
    let mut u = u0.clone();
    let report = |norms: Vec<f64>, converged, diverged, reason| IterationReport {
        norms,
        converged,
        diverged,
        reason,
    };
    if first < CONVERGED_NORM {
        return Ok(report(norms, true, false, None));
    }
    for _ in 0..n_iter {
        match apply_k(&u, family, period, set, DuhamelRoute::Direct, cfg) {
            Ok(next) => u = next,
            Err(e @ (Error::Instability { .. } | Error::NonFinite { .. } | Error::Resonance { .. })) => {
                return Ok(report(norms, false, true, Some(e.to_string())));
            }
            Err(e) => return Err(e),
        }
        let n = u.sobolev_norm(s);
        norms.push(n);
        if !n.is_finite() || n > DIVERGENCE_FACTOR * first {
            return Ok(report(norms, false, true, Some(format!("norm {n:e} exceeds 10x the initial norm"))));
        }
        if n < CONVERGED_NORM {
            return Ok(report(norms, true, false, None));
        }
    }
    Ok(report(norms, false, false, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub period: f64,
    pub factor: f64,
    /// Distance to the nearest removed interval of any mode `<= k_max`.
    pub gap: f64,
    pub nearest: ExcludedInterval,
    /// Mode carrying most of `‖K(T)u0‖_s`.
    pub dominant_mode: i64,
    /// Distance to the nearest removed interval of the dominant mode.
    pub dominant_gap: f64,
}

/// Contraction factors over `count` seeded certified periods, in sample order.
pub fn period_sweep(
    family: &EquationFamily,
    set: &ExcludedSet,
    count: usize,
    amplitude: f64,
    setup: &ContractionSetup,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let s = SobolevIndex::new(setup.s)?;
    let u0 = setup.profile.field(cfg.modes, amplitude)?;
    let periods = set.sample_periods(count, seed)?;
    periods
        .par_iter()
        .map(|&period| {
            let ku0 = apply_k(&u0, family, period, set, setup.route, cfg)?;
            let (gap, nearest) = set.gap_to_excluded(period);
            let weight = |k: i64| (k as f64).powf(2.0 * s.value()) * ku0.coeff(k).norm_sqr();
            let dominant_mode = (1..=ku0.modes() as i64)
                .max_by(|a, b| weight(*a).total_cmp(&weight(*b)))
                .unwrap_or(1);
            let dominant_gap = if (dominant_mode as u64) <= set.k_max {
                set.gap_for_mode(dominant_mode, period)
            } else {
                f64::NAN
            };
            Ok(SweepRow {
                period,
                factor: contraction_factor(&u0, &ku0, s),
                gap,
                nearest,
                dominant_mode,
                dominant_gap,
            })
        })
        .collect()
}
