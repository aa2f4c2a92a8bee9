//! The Duhamel term `S_D(T)u0 = u(T) - S_L(T)u0`, computed directly from the
//! solver and through the normal form
//! `S_D(T)u0 = S_L(T)(B(0) - B(T) + ∫_0^T (R + Q) dt)`.

pub mod normal_form;
pub mod phase;
pub mod smoothing;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evolution::{solve, SolverConfig, Trajectory};
use crate::family::EquationFamily;
use crate::spectrum::{FourierField, SobolevIndex};

pub use normal_form::NormalForm;

/// `S_L(T)(v(T) - v(0))`, which avoids subtracting two `O(1)` fields in `u`.
pub fn duhamel_from_trajectory(traj: &Trajectory) -> FourierField {
    let diff = traj.final_v().sub(traj.initial_v()).expect("same truncation");
    traj.family().symbol().apply_linear(traj.final_time(), &diff)
}

pub fn duhamel_direct(
    u0: &FourierField,
    family: &EquationFamily,
    period: f64,
    cfg: &SolverConfig,
) -> Result<FourierField> {
    Ok(duhamel_from_trajectory(&solve(u0, family, period, cfg)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormDuhamel {
    pub field: FourierField,
    /// `H^4` norm of the difference between full-grid and every-other-node
    /// panel integrals of `R + Q`.
    pub quadrature_error: f64,
    pub resonant_pairs: usize,
}

/// Normal-form reconstruction from the `v` snapshots of a trajectory.
pub fn normal_form_from_trajectory(traj: &Trajectory) -> NormalFormDuhamel {
    let family = traj.family();
    let modes = traj.initial_v().modes();
    let nf = NormalForm::new(family, modes);
    let times = traj.times();
    let t_end = traj.final_time();
    let b0 = nf.compute_b(traj.initial_v(), times[0]);
    let b1 = nf.compute_b(traj.final_v(), t_end);

    let full = nf.integrate(times, traj.v_snapshots());

    let mut coarse_idx: Vec<usize> = (0..times.len()).step_by(2).collect();
    if *coarse_idx.last().expect("non-empty") != times.len() - 1 {
        coarse_idx.push(times.len() - 1);
    }
    let coarse_t: Vec<f64> = coarse_idx.iter().map(|&i| times[i]).collect();
    let coarse_v: Vec<FourierField> =
        coarse_idx.iter().map(|&i| traj.v_snapshots()[i].clone()).collect();
    let coarse = nf.integrate(&coarse_t, &coarse_v);
    let h4 = SobolevIndex::from(4);
    let quadrature_error = full.sub(&coarse).expect("same truncation").sobolev_norm(h4);

    let total = b0
        .sub(&b1)
        .and_then(|d| d.add(&full))
        .expect("same truncation");
    NormalFormDuhamel {
        field: family.symbol().apply_linear(t_end, &total),
        quadrature_error,
        resonant_pairs: nf.resonant_count(),
    }
}

pub fn duhamel_normalform(
    u0: &FourierField,
    family: &EquationFamily,
    period: f64,
    cfg: &SolverConfig,
) -> Result<NormalFormDuhamel> {
    Ok(normal_form_from_trajectory(&solve(u0, family, period, cfg)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuhamelComparison {
    pub direct_h4: f64,
    pub normal_form_h4: f64,
    pub difference_h4: f64,
    /// `difference_h4 / direct_h4`.
    pub relative_h4: f64,
    pub quadrature_error: f64,
    pub resonant_pairs: usize,
}

/// Runs one solve and evaluates both routes on it.
pub fn compare_routes(
    u0: &FourierField,
    family: &EquationFamily,
    period: f64,
    cfg: &SolverConfig,
) -> Result<(FourierField, NormalFormDuhamel, DuhamelComparison)> {
    let traj = solve(u0, family, period, cfg)?;
    let direct = duhamel_from_trajectory(&traj);
    let nf = normal_form_from_trajectory(&traj);
    let h4 = SobolevIndex::from(4);
    let direct_h4 = direct.sobolev_norm(h4);
    let difference_h4 = direct.sub(&nf.field).expect("same truncation").sobolev_norm(h4);
    let cmp = DuhamelComparison {
        direct_h4,
        normal_form_h4: nf.field.sobolev_norm(h4),
        difference_h4,
        relative_h4: if direct_h4 > 0.0 { difference_h4 / direct_h4 } else { difference_h4 },
        quadrature_error: nf.quadrature_error,
        resonant_pairs: nf.resonant_pairs,
    };
    Ok((direct, nf, cmp))
}
