//! Differentiation by parts of the `v` equation
//! `v_k' = i c k Σ'_j e^{-iΦ(k,j)t} v_{k-j} v_j`, `c = c_nl / 2`.
//!
//! With `B_k = c k Σ'_j e^{-iΦ(k,j)t} / Φ(k,j) · v_{k-j} v_j` the equation
//! becomes `v_k' = -∂_t B_k + R_k + Q_k`, where
//! `R_k = 2 c k Σ'_j e^{-iΦ(k,j)t} / Φ(k,j) · v_{k-j} v_j'` and `Q_k` collects
//! the pairs with `Φ(k,j) = 0`, which are left in their original form.
//! All sums run over `|j|, |k-j| <= K`, matching the truncated dynamics, so
//! `v(T) - v(0) = B(0) - B(T) + ∫(R + Q)` holds up to time-stepping and
//! quadrature error.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::duhamel::phase::admissible;
use crate::family::EquationFamily;
use crate::spectrum::FourierField;
use crate::symbols::reduced_angle;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Phase table for `1 <= k <= K`, `k - K <= j <= K`.
#[derive(Debug, Clone)]
pub struct NormalForm {
    modes: usize,
    half_nl: f64,
    /// `phase[k-1][j - (k - K)]`
    phase: Vec<Vec<f64>>,
    resonant: Vec<Vec<bool>>,
    resonant_count: usize,
}

fn e_minus_i(phase: f64, t: f64) -> Complex64 {
    let (s, c) = reduced_angle(phase, t).sin_cos();
    Complex64::new(c, -s)
}

impl NormalForm {
    pub fn new(family: &EquationFamily, modes: usize) -> Self {
        let m = modes as i64;
        let mut phase = Vec::with_capacity(modes);
        let mut resonant = Vec::with_capacity(modes);
        let mut resonant_count = 0;
        for k in 1..=m {
            let row: Vec<f64> = (k - m..=m).map(|j| family.phase(k, j)).collect();
            let res: Vec<bool> = (k - m..=m)
                .map(|j| admissible(k, j) && family.is_resonant(k, j))
                .collect();
            resonant_count += res.iter().filter(|r| **r).count();
            phase.push(row);
            resonant.push(res);
        }
        Self {
            modes,
            half_nl: 0.5 * family.nonlinear_coefficient(),
            phase,
            resonant,
            resonant_count,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Resonant pairs `(k, j)` with `k >= 1`.
    pub fn resonant_count(&self) -> usize {
        self.resonant_count
    }

    fn row(&self, k: i64) -> (&[f64], &[bool], i64) {
        let i = (k - 1) as usize;
        (&self.phase[i], &self.resonant[i], k - self.modes as i64)
    }

    /// Fills `-k` by conjugation from values computed for `k >= 1`.
    fn assemble(&self, positive: Vec<Complex64>) -> FourierField {
        FourierField::from_positive(self.modes, &positive).expect("finite normal-form sums")
    }

    fn check(&self, v: &FourierField) {
        assert_eq!(v.modes(), self.modes, "field truncation differs from the phase table");
    }

    /// `B(v, t)`.
    pub fn compute_b(&self, v: &FourierField, t: f64) -> FourierField {
        self.check(v);
        let m = self.modes as i64;
        let out: Vec<Complex64> = (1..=m)
            .into_par_iter()
            .map(|k| {
                let (phase, res, j0) = self.row(k);
                let mut acc = ZERO;
                for j in j0..=m {
                    let idx = (j - j0) as usize;
                    if !admissible(k, j) || res[idx] {
                        continue;
                    }
                    let p = phase[idx];
                    acc += e_minus_i(p, t) / p * v.coeff(k - j) * v.coeff(j);
                }
                acc * (self.half_nl * k as f64)
            })
            .collect();
        self.assemble(out)
    }

    /// `v'(t)` from the truncated equation; all admissible pairs, resonant ones included.
    pub fn time_derivative(&self, v: &FourierField, t: f64) -> FourierField {
        self.check(v);
        let m = self.modes as i64;
        let out: Vec<Complex64> = (1..=m)
            .into_par_iter()
            .map(|k| {
                let (phase, _, j0) = self.row(k);
                let mut acc = ZERO;
                for j in j0..=m {
                    if !admissible(k, j) {
                        continue;
                    }
                    acc += e_minus_i(phase[(j - j0) as usize], t) * v.coeff(k - j) * v.coeff(j);
                }
                acc * Complex64::new(0.0, self.half_nl * k as f64)
            })
            .collect();
        self.assemble(out)
    }

    /// `R(v, t)` with the inner sum hoisted into `v'`, which makes it `O(K²)`.
    pub fn compute_r(&self, v: &FourierField, t: f64) -> FourierField {
        let w = self.time_derivative(v, t);
        self.compute_r_with(v, &w, t)
    }

    fn compute_r_with(&self, v: &FourierField, w: &FourierField, t: f64) -> FourierField {
        let m = self.modes as i64;
        let out: Vec<Complex64> = (1..=m)
            .into_par_iter()
            .map(|k| {
                let (phase, res, j0) = self.row(k);
                let mut acc = ZERO;
                for j in j0..=m {
                    let idx = (j - j0) as usize;
                    if !admissible(k, j) || res[idx] {
                        continue;
                    }
                    let p = phase[idx];
                    acc += e_minus_i(p, t) / p * v.coeff(k - j) * w.coeff(j);
                }
                acc * (2.0 * self.half_nl * k as f64)
            })
            .collect();
        self.assemble(out)
    }

    /// Resonant remainder `Q(v) = i c k Σ_{Φ(k,j)=0} v_{k-j} v_j`.
    pub fn compute_q(&self, v: &FourierField) -> FourierField {
        self.check(v);
        if self.resonant_count == 0 {
            return FourierField::zeros(self.modes);
        }
        let m = self.modes as i64;
        let out: Vec<Complex64> = (1..=m)
            .map(|k| {
                let (_, res, j0) = self.row(k);
                let mut acc = ZERO;
                for j in j0..=m {
                    if res[(j - j0) as usize] {
                        acc += v.coeff(k - j) * v.coeff(j);
                    }
                }
                acc * Complex64::new(0.0, self.half_nl * k as f64)
            })
            .collect();
        self.assemble(out)
    }

    /// Integrand `R + Q` of the time integral.
    pub fn integrand(&self, v: &FourierField, t: f64) -> FourierField {
        let r = self.compute_r(v, t);
        if self.resonant_count == 0 {
            r
        } else {
            r.add(&self.compute_q(v)).expect("same truncation")
        }
    }
}

/// Moments `∫_α^β e^{-iωs} s^n ds` for `n = 0, 1, 2`.
fn oscillatory_moments(omega: f64, alpha: f64, beta: f64) -> [Complex64; 3] {
    let reach = alpha.abs().max(beta.abs());
    if omega.abs() * reach <= 1.0 {
        // Power series; closed forms cancel badly here.
        let z = Complex64::new(0.0, -omega);
        let mut out = [ZERO; 3];
        for (n, slot) in out.iter_mut().enumerate() {
            let mut zf = Complex64::new(1.0, 0.0);
            let mut pa = alpha.powi(n as i32 + 1);
            let mut pb = beta.powi(n as i32 + 1);
            for m in 0..28 {
                *slot += zf * ((pb - pa) / (n + m + 1) as f64);
                zf *= z / (m + 1) as f64;
                pa *= alpha;
                pb *= beta;
            }
        }
        return out;
    }
    let ea = e_minus_i(omega, alpha);
    let eb = e_minus_i(omega, beta);
    let zi = Complex64::new(0.0, 1.0 / omega); // 1 / (-iω)
    let m0 = (eb - ea) * zi;
    let m1 = (eb * beta - ea * alpha) * zi - m0 * zi;
    let m2 = (eb * (beta * beta) - ea * (alpha * alpha)) * zi - m1 * zi * 2.0;
    [m0, m1, m2]
}

/// `∫_a^b e^{-iωt} L_m(t) dt` for the Lagrange basis `L_m` on `x`, returned
/// relative to the phase at `x[1]`.
fn filon_weights(omega: f64, x: [f64; 3], a: f64, b: f64) -> [Complex64; 3] {
    let o = x[1];
    let y = [x[0] - o, 0.0, x[2] - o];
    let mo = oscillatory_moments(omega, a - o, b - o);
    let mut w = [ZERO; 3];
    for i in 0..3 {
        let (p, q) = match i {
            0 => (y[1], y[2]),
            1 => (y[0], y[2]),
            _ => (y[0], y[1]),
        };
        let denom = (y[i] - p) * (y[i] - q);
        w[i] = (mo[2] - mo[1] * (p + q) + mo[0] * (p * q)) / denom;
    }
    w
}

/// Simpson panels as `(nodes, a, b)`; an odd trailing interval reuses the
/// last three nodes.
fn panels(times: &[f64]) -> Vec<([usize; 3], f64, f64)> {
    let n = times.len();
    let intervals = n.saturating_sub(1);
    let paired = intervals - intervals % 2;
    let mut out: Vec<_> = (0..paired)
        .step_by(2)
        .map(|i| ([i, i + 1, i + 2], times[i], times[i + 2]))
        .collect();
    if paired < intervals && n >= 3 {
        out.push(([n - 3, n - 2, n - 1], times[n - 2], times[n - 1]));
    }
    out
}

impl NormalForm {
    /// `∫ R dt` over snapshots `vs` at `times`. Each term
    /// `e^{-iΦt} · v_{k-j} v_j' / Φ` is integrated with its phase taken
    /// exactly and the slowly varying product interpolated quadratically on
    /// the Simpson panels, so large `|Φ| dt` does not degrade the result.
    pub fn integrate_r(&self, times: &[f64], vs: &[FourierField]) -> FourierField {
        assert_eq!(times.len(), vs.len());
        let m = self.modes as i64;
        if times.len() < 2 {
            return FourierField::zeros(self.modes);
        }
        let ws: Vec<FourierField> = times
            .iter()
            .zip(vs)
            .map(|(&t, v)| {
                self.check(v);
                self.time_derivative(v, t)
            })
            .collect();
        if times.len() == 2 {
            // Linear interpolation: a degenerate panel with a repeated node.
            let mid = 0.5 * (times[0] + times[1]);
            return self.integrate_r_linear(times, vs, &ws, mid);
        }
        let panel_list = panels(times);

        let out: Vec<Complex64> = (1..=m)
            .into_par_iter()
            .map(|k| {
                let (phase, res, j0) = self.row(k);
                let mut cache_geom: Option<[f64; 4]> = None;
                let mut table: Vec<[Complex64; 3]> = vec![[ZERO; 3]; phase.len()];
                let mut acc = ZERO;
                for &(nodes, a, b) in &panel_list {
                    let x = [times[nodes[0]], times[nodes[1]], times[nodes[2]]];
                    let geom = [x[0] - x[1], x[2] - x[1], a - x[1], b - x[1]];
                    if cache_geom != Some(geom) {
                        for (idx, slot) in table.iter_mut().enumerate() {
                            let j = j0 + idx as i64;
                            if admissible(k, j) && !res[idx] {
                                *slot = filon_weights(phase[idx], x, a, b);
                            }
                        }
                        cache_geom = Some(geom);
                    }
                    let mut panel = ZERO;
                    for j in j0..=m {
                        let idx = (j - j0) as usize;
                        if !admissible(k, j) || res[idx] {
                            continue;
                        }
                        let p = phase[idx];
                        let w = &table[idx];
                        let mut s = ZERO;
                        for (slot, &n) in nodes.iter().enumerate() {
                            s += w[slot] * vs[n].coeff(k - j) * ws[n].coeff(j);
                        }
                        panel += e_minus_i(p, x[1]) * s / p;
                    }
                    acc += panel;
                }
                acc * (2.0 * self.half_nl * k as f64)
            })
            .collect();
        self.assemble(out)
    }

    fn integrate_r_linear(
        &self,
        times: &[f64],
        vs: &[FourierField],
        ws: &[FourierField],
        mid: f64,
    ) -> FourierField {
        let m = self.modes as i64;
        let (a, b) = (times[0] - mid, times[1] - mid);
        let out: Vec<Complex64> = (1..=m)
            .map(|k| {
                let (phase, res, j0) = self.row(k);
                let mut acc = ZERO;
                for j in j0..=m {
                    let idx = (j - j0) as usize;
                    if !admissible(k, j) || res[idx] {
                        continue;
                    }
                    let p = phase[idx];
                    let mo = oscillatory_moments(p, a, b);
                    let g0 = vs[0].coeff(k - j) * ws[0].coeff(j);
                    let g1 = vs[1].coeff(k - j) * ws[1].coeff(j);
                    // g(s) = g0 (b - s)/(b - a) + g1 (s - a)/(b - a)
                    let s = (g0 * (mo[0] * b - mo[1]) + g1 * (mo[1] - mo[0] * a)) / (b - a);
                    acc += e_minus_i(p, mid) * s / p;
                }
                acc * (2.0 * self.half_nl * k as f64)
            })
            .collect();
        self.assemble(out)
    }

    /// `∫ (R + Q) dt` over snapshots: Filon panels for `R`, Simpson for `Q`.
    pub fn integrate(&self, times: &[f64], vs: &[FourierField]) -> FourierField {
        let r = self.integrate_r(times, vs);
        if self.resonant_count == 0 {
            return r;
        }
        let qs: Vec<FourierField> = vs.iter().map(|v| self.compute_q(v)).collect();
        r.add(&weighted_sum(&simpson_weights(times), &qs)).expect("same truncation")
    }
}

/// Weights of `∫_a^b p(x) dx` for the quadratic `p` through three nodes.
fn quadratic_weights(x: [f64; 3], a: f64, b: f64) -> [f64; 3] {
    // Shift to x[0] to limit cancellation.
    let o = x[0];
    let x = [0.0, x[1] - o, x[2] - o];
    let (a, b) = (a - o, b - o);
    let prim = |p: f64, q: f64, s: f64| s * s * s / 3.0 - (p + q) * s * s / 2.0 + p * q * s;
    let mut w = [0.0; 3];
    for i in 0..3 {
        let (p, q) = match i {
            0 => (x[1], x[2]),
            1 => (x[0], x[2]),
            _ => (x[0], x[1]),
        };
        let denom = (x[i] - p) * (x[i] - q);
        w[i] = (prim(p, q, b) - prim(p, q, a)) / denom;
    }
    w
}

/// Composite Simpson weights on a nonuniform grid; an odd trailing interval
/// uses the quadratic through the last three nodes.
pub fn simpson_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => return w,
        2 => {
            let h = times[1] - times[0];
            return vec![0.5 * h, 0.5 * h];
        }
        _ => {}
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut i = 0;
    while i < paired {
        let x = [times[i], times[i + 1], times[i + 2]];
        let q = quadratic_weights(x, x[0], x[2]);
        for (d, qd) in q.iter().enumerate() {
            w[i + d] += qd;
        }
        i += 2;
    }
    if paired < intervals {
        let x = [times[n - 3], times[n - 2], times[n - 1]];
        let q = quadratic_weights(x, x[1], x[2]);
        for (d, qd) in q.iter().enumerate() {
            w[n - 3 + d] += qd;
        }
    }
    w
}

/// `Σ w_i f_i` over fields.
pub fn weighted_sum(weights: &[f64], fields: &[FourierField]) -> FourierField {
    let modes = fields[0].modes();
    let mut acc = vec![ZERO; modes];
    for (w, f) in weights.iter().zip(fields) {
        if *w == 0.0 {
            continue;
        }
        for (a, c) in acc.iter_mut().zip(f.positive()) {
            *a += c * *w;
        }
    }
    FourierField::from_positive(modes, &acc).expect("finite quadrature")
}
