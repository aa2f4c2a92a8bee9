//! Amplitude ladders for the smoothing estimate
//! `‖S_D(T)u0‖_{s+p} <= c ‖u0‖_s ‖u0‖^q_{s+p̃}` and for the quadratic and
//! cubic bounds on `B` and `R`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{duhamel_direct, NormalForm};
use crate::error::{Error, Result};
use crate::evolution::SolverConfig;
use crate::family::{EquationFamily, SmoothingIndices};
use crate::spectrum::{random_field, Profile, SobolevIndex};
use crate::stats::{check_ladder, loglog_fit, LogLogFit};

fn index(s: f64) -> Result<SobolevIndex> {
    SobolevIndex::new(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingRow {
    pub amplitude: f64,
    /// `‖u0‖_s`
    pub norm_s: f64,
    /// `‖u0‖_{s+p̃}`
    pub norm_s_ptilde: f64,
    /// `‖S_D(T)u0‖_{s+p}`
    pub duhamel_norm: f64,
    /// `‖S_D‖_{s+p} / (‖u0‖_s ‖u0‖^q_{s+p̃})`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub family: String,
    pub indices: SmoothingIndices,
    pub period: f64,
    pub profile: Profile,
    pub rows: Vec<SmoothingRow>,
    /// Fit of `‖S_D‖_{s+p}` against `‖u0‖_s`.
    pub exponent: Option<LogLogFit>,
    /// `max ratio / min ratio` over the rows.
    pub ratio_spread: Option<f64>,
    /// Largest `‖u0‖_{s+p̃}` on the ladder.
    pub eta: f64,
    /// Set when a rung failed; `rows` then holds the rungs before it.
    pub failure: Option<String>,
}

impl SmoothingReport {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

fn smoothing_row(
    family: &EquationFamily,
    idx: SmoothingIndices,
    period: f64,
    profile: &Profile,
    amplitude: f64,
    cfg: &SolverConfig,
) -> Result<SmoothingRow> {
    let u0 = profile.field(cfg.modes, amplitude)?;
    let sd = duhamel_direct(&u0, family, period, cfg)?;
    let norm_s = u0.sobolev_norm(index(idx.s)?);
    let norm_s_ptilde = u0.sobolev_norm(index(idx.s + idx.p_tilde)?);
    let duhamel_norm = sd.sobolev_norm(index(idx.s + idx.p)?);
    Ok(SmoothingRow {
        amplitude,
        norm_s,
        norm_s_ptilde,
        duhamel_norm,
        ratio: duhamel_norm / (norm_s * norm_s_ptilde.powf(idx.q)),
    })
}

fn spread(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    (lo > 0.0 && lo.is_finite()).then(|| hi / lo)
}

/// Runs the ladder rungs in parallel; rows keep ladder order.
pub fn smoothing_report(
    family: &EquationFamily,
    indices: SmoothingIndices,
    period: f64,
    ladder: &[f64],
    profile: Profile,
    cfg: &SolverConfig,
) -> Result<SmoothingReport> {
    check_ladder(ladder)?;
    cfg.validate()?;
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParameter {
            name: "period",
            reason: format!("{period} is not positive"),
        });
    }
    let results: Vec<Result<SmoothingRow>> = ladder
        .par_iter()
        .map(|&a| smoothing_row(family, indices, period, &profile, a, cfg))
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
    let exponent = if failure.is_none() {
        let x: Vec<f64> = rows.iter().map(|r| r.norm_s).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.duhamel_norm).collect();
        Some(loglog_fit(&x, &y)?)
    } else {
        None
    };
    Ok(SmoothingReport {
        family: family.to_string(),
        indices,
        period,
        profile,
        ratio_spread: spread(rows.iter().map(|r| r.ratio)),
        eta: rows.iter().map(|r| r.norm_s_ptilde).fold(0.0, f64::max),
        rows,
        exponent,
        failure,
    })
}

/// Derivative gains of `B` and `R` over `v` measured in `H^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaIndices {
    pub s: f64,
    pub b_gain: f64,
    pub r_gain: f64,
}

impl Default for LemmaIndices {
    fn default() -> Self {
        Self {
            s: 4.0,
            b_gain: 3.0,
            r_gain: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub amplitude: f64,
    pub v_norm: f64,
    pub b_norm: f64,
    pub r_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub family: String,
    pub indices: LemmaIndices,
    pub time: f64,
    pub rows: Vec<LemmaRow>,
    pub b_fit: LogLogFit,
    pub r_fit: LogLogFit,
}

/// `‖B(v)‖_{s+b_gain}` and `‖R(v)‖_{s+r_gain}` against `‖v‖_s` along a ladder
/// of scaled copies of one profile, evaluated at time `time`.
pub fn lemma_scaling(
    family: &EquationFamily,
    indices: LemmaIndices,
    time: f64,
    ladder: &[f64],
    profile: Profile,
    modes: usize,
) -> Result<LemmaReport> {
    check_ladder(ladder)?;
    let nf = NormalForm::new(family, modes);
    let (is, ib, ir) = (
        index(indices.s)?,
        index(indices.s + indices.b_gain)?,
        index(indices.s + indices.r_gain)?,
    );
    let rows = ladder
        .iter()
        .map(|&a| {
            let v = profile.field(modes, a)?;
            Ok(LemmaRow {
                amplitude: a,
                v_norm: v.sobolev_norm(is),
                b_norm: nf.compute_b(&v, time).sobolev_norm(ib),
                r_norm: nf.compute_r(&v, time).sobolev_norm(ir),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.v_norm).collect();
    let yb: Vec<f64> = rows.iter().map(|r| r.b_norm).collect();
    let yr: Vec<f64> = rows.iter().map(|r| r.r_norm).collect();
    Ok(LemmaReport {
        family: family.to_string(),
        indices,
        time,
        b_fit: loglog_fit(&x, &yb)?,
        r_fit: loglog_fit(&x, &yr)?,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub modes: usize,
    /// `‖v‖_{s+b_gain}`, which grows with `K` for the chosen decay.
    pub v_gain_norm: f64,
    pub b_norm: f64,
    pub r_norm: f64,
}

/// Fixed data `c_k = amplitude · k^{-decay}` truncated at growing `K`.
/// Bounded `B` and `R` columns next to a growing `v` column show that the
/// gain is real rather than an artefact of norm equivalence at fixed `K`.
pub fn gain_ladder(
    family: &EquationFamily,
    indices: LemmaIndices,
    time: f64,
    truncations: &[usize],
    amplitude: f64,
    decay: f64,
    seed: u64,
) -> Result<Vec<GainRow>> {
    let ib = index(indices.s + indices.b_gain)?;
    let ir = index(indices.s + indices.r_gain)?;
    truncations
        .iter()
        .map(|&modes| {
            if modes == 0 {
                return Err(Error::InvalidParameter {
                    name: "K",
                    reason: "truncation must be positive".into(),
                });
            }
            let v = random_field(modes, amplitude, decay, seed);
            let nf = NormalForm::new(family, modes);
            Ok(GainRow {
                modes,
                v_gain_norm: v.sobolev_norm(ib),
                b_norm: nf.compute_b(&v, time).sobolev_norm(ib),
                r_norm: nf.compute_r(&v, time).sobolev_norm(ir),
            })
        })
        .collect()
}
