//! Pseudospectral time stepping in the integrating-factor variable
//! `v_k(t) = e^{-iψ(k)t} u_k(t)`.
//!
//! The stiff linear part is carried exactly by the integrating factor, so the
//! classical RK4 stages only see the nonlinearity
//! `∂_t v_k = e^{-iψ(k)t} · (c_nl/2) · ik · (u²)_k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::EquationFamily;
use crate::spectrum::{Convolver, FourierField, SobolevIndex, MAX_MODES};

/// Index of the norm watched by the growth and doubling monitors.
pub const MONITOR_INDEX: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Integrating-factor classical Runge-Kutta.
    Ifrk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(rename = "K")]
    pub modes: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    pub snapshot_stride: usize,
    /// Abort once `‖u‖_{H^6}` exceeds this multiple of its initial value.
    pub growth_limit: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            modes: 64,
            dt: 1e-3,
            scheme: Scheme::Ifrk4,
            dealias: true,
            snapshot_stride: 1,
            growth_limit: 10.0,
        }
    }
}

impl SolverConfig {
    pub fn new(modes: usize, dt: f64) -> Self {
        Self {
            modes,
            dt,
            ..Self::default()
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 || self.modes > MAX_MODES {
            return Err(Error::InvalidParameter {
                name: "K",
                reason: format!("need 1 <= K <= {MAX_MODES}, got {}", self.modes),
            });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("need a positive step, got {}", self.dt),
            });
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter {
                name: "snapshot_stride",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.growth_limit > 1.0) {
            return Err(Error::InvalidParameter {
                name: "growth_limit",
                reason: "must exceed 1".into(),
            });
        }
        Ok(())
    }

    /// Nonlinear CFL cap `0.5 / (K |c_nl| sup|u0|)`.
    pub fn cfl_cap(&self, family: &EquationFamily, u0: &FourierField) -> f64 {
        let speed = self.modes as f64 * family.nonlinear_coefficient().abs() * u0.sup_bound();
        if speed > 0.0 {
            0.5 / speed
        } else {
            f64::INFINITY
        }
    }
}

/// Number of steps covering `span` with step `dt`, the last one possibly
/// shortened. Spans within rounding of a multiple of `dt` are not padded with
/// a sliver step.
pub fn step_count(span: f64, dt: f64) -> usize {
    let x = span.abs() / dt;
    let m = x.round();
    if (x - m).abs() <= 1e-9 * x.max(1.0) {
        m as usize
    } else {
        x.ceil() as usize
    }
}

/// Snapshots of `v` at the stored times, starting at the initial time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    family: EquationFamily,
    times: Vec<f64>,
    v: Vec<FourierField>,
    dt: f64,
}

impl Trajectory {
    pub fn family(&self) -> &EquationFamily {
        &self.family
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn v(&self, i: usize) -> &FourierField {
        &self.v[i]
    }

    pub fn v_snapshots(&self) -> &[FourierField] {
        &self.v
    }

    /// `u(t_i) = S_L(t_i) v(t_i)`.
    pub fn u(&self, i: usize) -> FourierField {
        self.family.symbol().apply_linear(self.times[i], &self.v[i])
    }

    pub fn initial_v(&self) -> &FourierField {
        &self.v[0]
    }

    pub fn final_v(&self) -> &FourierField {
        self.v.last().expect("non-empty trajectory")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    pub fn final_u(&self) -> FourierField {
        self.u(self.len() - 1)
    }
}

/// Right-hand side of the `v` equation.
struct Rhs<'a> {
    family: &'a EquationFamily,
    conv: Convolver,
    half_nl: f64,
}

impl Rhs<'_> {
    fn eval(&self, t: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = v.len();
        if self.half_nl == 0.0 {
            return Ok(vec![Complex64::new(0.0, 0.0); m]);
        }
        let symbol = self.family.symbol();
        let mut up = Vec::with_capacity(m);
        for (i, c) in v.iter().enumerate() {
            up.push(c * symbol.propagator_multiplier(t, i as i64 + 1));
        }
        let u = FourierField::from_positive(m, &up).map_err(|_| Error::NonFinite { time: t })?;
        let sq = self.conv.square(&u);
        Ok(sq
            .positive()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = i as i64 + 1;
                let factor = Complex64::new(0.0, self.half_nl * k as f64);
                c * factor * symbol.propagator_multiplier(-t, k)
            })
            .collect())
    }
}

fn axpy(v: &[Complex64], h: f64, k: &[Complex64]) -> Vec<Complex64> {
    v.iter().zip(k).map(|(a, b)| a + b * h).collect()
}

/// What to do after a completed step.
enum Control {
    Continue,
    Stop,
}

/// Core stepping loop from `v_start` at `t_start` to `t_end` (either
/// direction). `observe` sees every step; snapshots follow the stride.
fn run(
    v_start: &FourierField,
    family: &EquationFamily,
    t_start: f64,
    t_end: f64,
    cfg: &SolverConfig,
    mut observe: impl FnMut(f64, &FourierField) -> Result<Control>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let v0 = if v_start.modes() == cfg.modes {
        v_start.clone()
    } else {
        v_start.retruncate(cfg.modes)
    };
    let u_start = family.symbol().apply_linear(t_start, &v0);
    let cap = cfg.cfl_cap(family, &u_start);
    if cfg.dt > cap {
        return Err(Error::CflViolation { dt: cfg.dt, cap });
    }
    let rhs = Rhs {
        family,
        conv: Convolver::new(cfg.modes, cfg.dealias),
        half_nl: 0.5 * family.nonlinear_coefficient(),
    };
    let monitor = SobolevIndex::new(MONITOR_INDEX).expect("valid index");
    let norm0 = v0.sobolev_norm(monitor);
    let steps = step_count(t_end - t_start, cfg.dt);
    let sign = if t_end >= t_start { 1.0 } else { -1.0 };

    let mut times = vec![t_start];
    let mut snaps = vec![v0.clone()];
    let mut v: Vec<Complex64> = v0.positive().to_vec();
    for n in 0..steps {
        let t = t_start + sign * n as f64 * cfg.dt;
        let t_next = if n + 1 == steps {
            t_end
        } else {
            t_start + sign * (n + 1) as f64 * cfg.dt
        };
        let h = t_next - t;
        let k1 = rhs.eval(t, &v)?;
        let k2 = rhs.eval(t + 0.5 * h, &axpy(&v, 0.5 * h, &k1))?;
        let k3 = rhs.eval(t + 0.5 * h, &axpy(&v, 0.5 * h, &k2))?;
        let k4 = rhs.eval(t_next, &axpy(&v, h, &k3))?;
        for i in 0..v.len() {
            v[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        let field = FourierField::from_positive(cfg.modes, &v)
            .map_err(|_| Error::NonFinite { time: t_next })?;
        let norm = field.sobolev_norm(monitor);
        if norm0 > 0.0 && norm > cfg.growth_limit * norm0 {
            return Err(Error::Instability {
                time: t_next,
                growth: norm / norm0,
            });
        }
        let control = observe(t_next, &field)?;
        let last = n + 1 == steps || matches!(control, Control::Stop);
        if last || (n + 1) % cfg.snapshot_stride == 0 {
            times.push(t_next);
            snaps.push(field);
        }
        if matches!(control, Control::Stop) {
            break;
        }
    }
    Ok(Trajectory {
        family: family.clone(),
        times,
        v: snaps,
        dt: cfg.dt,
    })
}

/// Integrates from `u_start` at time `t_start` to `t_end`; `t_end < t_start`
/// runs the equation backwards.
pub fn integrate(
    u_start: &FourierField,
    family: &EquationFamily,
    t_start: f64,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    if !(t_start.is_finite() && t_end.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "T",
            reason: "times must be finite".into(),
        });
    }
    let v_start = family.symbol().apply_linear(-t_start, u_start);
    run(&v_start, family, t_start, t_end, cfg, |_, _| Ok(Control::Continue))
}

/// Solves on `[0, T]` from `u0`.
pub fn solve(
    u0: &FourierField,
    family: &EquationFamily,
    period: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    if !(period > 0.0) {
        return Err(Error::InvalidParameter {
            name: "T",
            reason: format!("need T > 0, got {period}"),
        });
    }
    integrate(u0, family, 0.0, period, cfg)
}

/// Runs the equation backwards from `u_end` at time `t_end` to time zero.
pub fn reverse(
    u_end: &FourierField,
    family: &EquationFamily,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<FourierField> {
    Ok(integrate(u_end, family, t_end, 0.0, cfg)?.final_u())
}

/// Data with a possibly nonzero spatial mean.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldWithMean {
    pub mean: f64,
    pub field: FourierField,
}

/// Splits off the mean and returns the family seen by the mean-zero part.
pub fn reduce_mean(g: &FieldWithMean, family: &EquationFamily) -> Result<(FourierField, EquationFamily)> {
    if !g.mean.is_finite() {
        return Err(Error::InvalidParameter {
            name: "mean",
            reason: "must be finite".into(),
        });
    }
    let fam = if g.mean == 0.0 {
        family.clone()
    } else {
        family.shifted_mean(g.mean)?
    };
    Ok((g.field.clone(), fam))
}

/// Adds the mean back: `ũ = u + ḡ`.
pub fn restore_mean(u: &FourierField, mean: f64) -> FieldWithMean {
    FieldWithMean {
        mean,
        field: u.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub mean: f64,
    pub l2: f64,
    pub h6: f64,
}

/// Mean, `L²` norm and `H^6` norm at every snapshot. The propagator is
/// unitary, so the norms of `v` and `u` agree.
pub fn conserved_diagnostics(traj: &Trajectory) -> Vec<DiagnosticRow> {
    let h6 = SobolevIndex::new(MONITOR_INDEX).expect("valid index");
    traj.times()
        .iter()
        .zip(traj.v_snapshots())
        .map(|(&t, v)| DiagnosticRow {
            t,
            mean: v.coeff(0).re,
            l2: v.l2_norm(),
            h6: v.sobolev_norm(h6),
        })
        .collect()
}

/// Largest relative `L²` drift along the trajectory.
pub fn max_l2_drift(traj: &Trajectory) -> f64 {
    let rows = conserved_diagnostics(traj);
    let l0 = rows[0].l2;
    if l0 == 0.0 {
        return 0.0;
    }
    rows.iter().map(|r| (r.l2 - l0).abs() / l0).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingVerdict {
    pub pass: bool,
    pub first_violation: Option<f64>,
    pub max_ratio: f64,
}

/// Checks `‖u(t)‖_{H^6} <= 2‖u0‖_{H^6}` at every snapshot.
pub fn doubling_time_check(traj: &Trajectory, u0: &FourierField) -> DoublingVerdict {
    let h6 = SobolevIndex::new(MONITOR_INDEX).expect("valid index");
    let n0 = u0.sobolev_norm(h6);
    let mut first = None;
    let mut max_ratio: f64 = if n0 > 0.0 { 0.0 } else { 1.0 };
    for (t, v) in traj.times().iter().zip(traj.v_snapshots()) {
        let n = v.sobolev_norm(h6);
        if n0 > 0.0 {
            max_ratio = max_ratio.max(n / n0);
        }
        if n > 2.0 * n0 && first.is_none() {
            first = Some(*t);
        }
    }
    DoublingVerdict {
        pass: first.is_none(),
        first_violation: first,
        max_ratio,
    }
}

/// First time `‖u(t)‖_{H^6}` reaches `2‖u0‖_{H^6}`, or `None` if it stays
/// below on `[0, t_max]`.
pub fn empirical_doubling_time(
    u0: &FourierField,
    family: &EquationFamily,
    t_max: f64,
    cfg: &SolverConfig,
) -> Result<Option<f64>> {
    let h6 = SobolevIndex::new(MONITOR_INDEX).expect("valid index");
    let n0 = u0.sobolev_norm(h6);
    if n0 == 0.0 {
        return Ok(None);
    }
    let mut hit = None;
    let cfg = SolverConfig {
        growth_limit: f64::MAX,
        snapshot_stride: usize::MAX,
        ..*cfg
    };
    run(u0, family, 0.0, t_max, &cfg, |t, v| {
        if v.sobolev_norm(h6) >= 2.0 * n0 {
            hit = Some(t);
            Ok(Control::Stop)
        } else {
            Ok(Control::Continue)
        }
    })?;
    Ok(hit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::random_field;

    fn fams() -> Vec<EquationFamily> {
        vec![
            EquationFamily::fifth(0.0),
            EquationFamily::kawahara(0.5, 0.0).unwrap(),
            EquationFamily::seventh(0.0),
            EquationFamily::kdv(0.0),
        ]
    }

    #[test]
    fn step_counts() {
        assert_eq!(step_count(1.0, 1e-3), 1000);
        assert_eq!(step_count(1.0, 0.3), 4);
        assert_eq!(step_count(0.0, 0.1), 0);
        assert_eq!(step_count(-1.0, 0.25), 4);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0, 1e-3).validate().is_err());
        assert!(SolverConfig::new(8, 0.0).validate().is_err());
        assert!(SolverConfig::new(8, 1e-3).with_stride(0).validate().is_err());
        assert!(SolverConfig::new(1000, 1e-3).validate().is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let cfg = SolverConfig::new(16, 1e-2);
        let traj = solve(&FourierField::zeros(16), &EquationFamily::fifth(0.0), 0.5, &cfg).unwrap();
        assert_eq!(traj.len(), 51);
        assert!(traj.final_u().is_zero());
        assert!(doubling_time_check(&traj, &FourierField::zeros(16)).pass);
        assert!(conserved_diagnostics(&traj).iter().all(|r| r.l2 == 0.0 && r.h6 == 0.0));
    }

    #[test]
    fn last_step_lands_on_t() {
        let cfg = SolverConfig::new(8, 0.3);
        let u0 = FourierField::cos_mode(8, 1, 1e-3);
        let traj = solve(&u0, &EquationFamily::kdv(0.0), 1.0, &cfg).unwrap();
        assert_eq!(traj.times(), &[0.0, 0.3, 0.6, 0.8999999999999999, 1.0][..]);
    }

    #[test]
    fn linear_flow_is_exact() {
        for f in fams() {
            let lin = f.with_nonlinear_coefficient(0.0);
            let u0 = random_field(32, 1e-2, 2.0, 3);
            for dt in [0.1, 0.013] {
                let u = solve(&u0, &lin, 1.3, &SolverConfig::new(32, dt)).unwrap().final_u();
                let exact = f.symbol().apply_linear(1.3, &u0);
                assert!(u.sub(&exact).unwrap().l2_norm() <= 1e-12 * u0.l2_norm(), "{f}");
            }
        }
    }

    #[test]
    fn invariants_under_stepping() {
        let u0 = random_field(16, 1e-2, 4.0, 9);
        let traj = solve(&u0, &EquationFamily::fifth(0.0), 0.2, &SolverConfig::new(16, 1e-3)).unwrap();
        for i in 0..traj.len() {
            traj.u(i).check_invariants(0.0).unwrap();
            assert_eq!(traj.u(i).coeff(0), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn cfl_and_instability() {
        let u0 = FourierField::cos_mode(32, 1, 1.0);
        let err = solve(&u0, &EquationFamily::fifth(0.0), 1.0, &SolverConfig::new(32, 0.05)).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
        let cfg = SolverConfig {
            growth_limit: 1.0 + 1e-9,
            ..SolverConfig::new(16, 1e-3)
        };
        let u0 = random_field(16, 0.05, 3.0, 1);
        assert!(matches!(
            solve(&u0, &EquationFamily::kdv(0.0), 1.0, &cfg),
            Err(Error::Instability { .. })
        ));
    }

    #[test]
    fn time_reversal_returns_data() {
        let cfg = SolverConfig::new(32, 1e-3);
        for f in fams() {
            let u0 = random_field(32, 1e-2, 8.0, 21);
            let u_t = solve(&u0, &f, 0.5, &cfg).unwrap().final_u();
            let back = reverse(&u_t, &f, 0.5, &cfg).unwrap();
            let rel = back.sub(&u0).unwrap().l2_norm() / u0.l2_norm();
            assert!(rel < 1e-6, "{f}: {rel}");
        }
    }

    #[test]
    fn mean_reduction() {
        let g = FieldWithMean {
            mean: 0.0,
            field: random_field(8, 1.0, 1.0, 0),
        };
        let f = EquationFamily::fifth(0.0);
        let (g0, same) = reduce_mean(&g, &f).unwrap();
        assert_eq!(same, f);
        assert_eq!(g0, g.field);
        let g = FieldWithMean { mean: 0.125, ..g };
        let (_, shifted) = reduce_mean(&g, &f).unwrap();
        assert_eq!(shifted.params().omega, -0.25);
        assert_eq!(restore_mean(&g0, 0.125), g);
    }

    #[test]
    fn small_data_does_not_double() {
        let u0 = FourierField::cos_mode(32, 1, 1e-3);
        let f = EquationFamily::fifth(0.0);
        let traj = solve(&u0, &f, 2.0, &SolverConfig::new(32, 1e-3).with_stride(10)).unwrap();
        assert!(doubling_time_check(&traj, &u0).pass);
    }
}
