//! Truncated Fourier representation of real, mean-zero, 2π-periodic fields.
//!
//! A [`FourierField`] stores the coefficients `c_k` for `k ∈ [-K, K]` densely.
//! Two invariants hold for every value handed out by this module:
//! `c_0 = 0` and `c_{-k} = conj(c_k)`.
//!
//! Norms use homogeneous weights, `‖f‖_s² = Σ_{k≠0} |k|^{2s} |c_k|²`, and drop
//! the 2π factor of the L² pairing. On mean-zero fields this is equivalent to
//! the usual inhomogeneous `H^s` norm.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest truncation the crate is tuned for.
pub const MAX_MODES: usize = 512;

/// Derivative order of a Sobolev norm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s >= 0.0 {
            Ok(Self(s))
        } else {
            Err(Error::InvalidParameter {
                name: "s",
                reason: format!("Sobolev index must be finite and nonnegative, got {s}"),
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `s + offset`; offsets are nonnegative derivative gains.
    pub fn offset(self, by: f64) -> Result<Self> {
        Self::new(self.0 + by)
    }
}

impl From<u32> for SobolevIndex {
    fn from(s: u32) -> Self {
        Self(s as f64)
    }
}

impl fmt::Display for SobolevIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq)]
pub struct FourierField {
    modes: usize,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for FourierField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierField")
            .field("K", &self.modes)
            .field("positive", &&self.coeffs[self.modes + 1..])
            .finish()
    }
}

impl FourierField {
    pub fn zeros(modes: usize) -> Self {
        assert!(modes >= 1, "truncation K must be at least 1");
        Self {
            modes,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * modes + 1],
        }
    }

    /// Builds a field from the coefficients of modes `1..=K`; the negative half
    /// is filled in by conjugation.
    pub fn from_positive(modes: usize, positive: &[Complex64]) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidField("K must be at least 1".into()));
        }
        if positive.len() != modes {
            return Err(Error::InvalidField(format!(
                "expected {modes} positive coefficients, got {}",
                positive.len()
            )));
        }
        if positive.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidField("non-finite coefficient".into()));
        }
        let mut f = Self::zeros(modes);
        for (i, c) in positive.iter().enumerate() {
            f.set_mode(i as i64 + 1, *c);
        }
        Ok(f)
    }

    /// Validating constructor from a dense `[-K, K]` array.
    pub fn from_dense(modes: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if modes == 0 || coeffs.len() != 2 * modes + 1 {
            return Err(Error::InvalidField(format!(
                "dense storage for K = {modes} needs {} entries, got {}",
                2 * modes + 1,
                coeffs.len()
            )));
        }
        let f = Self { modes, coeffs };
        f.check_invariants(0.0)?;
        Ok(f)
    }

    /// Enforces the invariants on a dense array that may carry rounding noise:
    /// drops the mean and averages each `±k` pair onto Hermitian symmetry.
    pub fn project(modes: usize, mut coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), 2 * modes + 1);
        coeffs[modes] = Complex64::new(0.0, 0.0);
        for k in 1..=modes {
            let avg = 0.5 * (coeffs[modes + k] + coeffs[modes - k].conj());
            coeffs[modes + k] = avg;
            coeffs[modes - k] = avg.conj();
        }
        Self { modes, coeffs }
    }

    pub fn cos_mode(modes: usize, k: usize, amplitude: f64) -> Self {
        let mut f = Self::zeros(modes);
        f.set_mode(k as i64, Complex64::new(0.5 * amplitude, 0.0));
        f
    }

    pub fn sin_mode(modes: usize, k: usize, amplitude: f64) -> Self {
        let mut f = Self::zeros(modes);
        f.set_mode(k as i64, Complex64::new(0.0, -0.5 * amplitude));
        f
    }

    /// Truncation `K`.
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let m = self.modes as i64;
        if k.abs() > m {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + m) as usize]
        }
    }

    /// Sets `c_k` and `c_{-k} = conj(c_k)`; `k = 0` is rejected.
    pub fn set_mode(&mut self, k: i64, c: Complex64) {
        assert!(k != 0 && k.unsigned_abs() as usize <= self.modes, "mode {k} out of range");
        let m = self.modes as i64;
        let (k, c) = if k < 0 { (-k, c.conj()) } else { (k, c) };
        self.coeffs[(m + k) as usize] = c;
        self.coeffs[(m - k) as usize] = c.conj();
    }

    pub fn dense(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficients of modes `1..=K`.
    pub fn positive(&self) -> &[Complex64] {
        &self.coeffs[self.modes + 1..]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Checks mean zero, finiteness and Hermitian symmetry to absolute `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let m = self.modes;
        if self.coeffs[m] != Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidField(format!("nonzero mean {}", self.coeffs[m])));
        }
        for k in 1..=m {
            let (p, n) = (self.coeffs[m + k], self.coeffs[m - k]);
            if !(p.re.is_finite() && p.im.is_finite() && n.re.is_finite() && n.im.is_finite()) {
                return Err(Error::InvalidField(format!("non-finite coefficient at k = {k}")));
            }
            if (p - n.conj()).norm() > tol {
                return Err(Error::InvalidField(format!(
                    "Hermitian symmetry broken at k = {k}: {p} vs conj({n})"
                )));
            }
        }
        Ok(())
    }

    pub fn sobolev_norm(&self, s: SobolevIndex) -> f64 {
        self.sobolev_norm_squared(s).sqrt()
    }

    pub fn sobolev_norm_squared(&self, s: SobolevIndex) -> f64 {
        // Both halves carry the same weight, so sum k >= 1 and double.
        let two_s = 2.0 * s.value();
        let sum: f64 = self
            .positive()
            .iter()
            .enumerate()
            .map(|(i, c)| ((i + 1) as f64).powf(two_s) * c.norm_sqr())
            .sum();
        2.0 * sum
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(SobolevIndex(0.0))
    }

    /// Spectral `∂_x^n`: multiplies `c_k` by `(ik)^n`.
    pub fn derivative(&self, n: u32) -> Self {
        let m = self.modes as i64;
        let i_pow = match n % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let mut out = self.clone();
        for k in 1..=m {
            let w = i_pow * (k as f64).powi(n as i32);
            out.set_mode(k, self.coeff(k) * w);
        }
        out
    }

    /// Mean-zero projection of the pointwise product, truncated to `[-K, K]`.
    ///
    /// The product is formed on a zero-padded grid, so the retained modes are
    /// exactly the truncated convolution.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.modes != other.modes {
            return Err(Error::TruncationMismatch {
                left: self.modes,
                right: other.modes,
            });
        }
        Ok(Convolver::new(self.modes, true).product(self, other))
    }

    pub fn scale(&self, a: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * a).collect();
        Self {
            modes: self.modes,
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.modes != other.modes {
            return Err(Error::TruncationMismatch {
                left: self.modes,
                right: other.modes,
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| op(*a, *b))
            .collect();
        Ok(Self {
            modes: self.modes,
            coeffs,
        })
    }

    /// Applies a per-mode multiplier given for `k >= 1`; the `-k` entry gets the
    /// conjugate so the result stays real.
    pub fn map_positive(&self, mut f: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        let mut out = Self::zeros(self.modes);
        for k in 1..=self.modes as i64 {
            out.set_mode(k, f(k, self.coeff(k)));
        }
        out
    }

    /// Same as [`map_positive`](Self::map_positive) with a fallible map.
    pub fn try_map_positive(
        &self,
        mut f: impl FnMut(i64, Complex64) -> Result<Complex64>,
    ) -> Result<Self> {
        let mut out = Self::zeros(self.modes);
        for k in 1..=self.modes as i64 {
            out.set_mode(k, f(k, self.coeff(k))?);
        }
        Ok(out)
    }

    /// Replaces every coefficient by its modulus.
    pub fn abs_field(&self) -> Self {
        self.map_positive(|_, c| Complex64::new(c.norm(), 0.0))
    }

    /// Copies the field into a different truncation, dropping or zero-filling modes.
    pub fn retruncate(&self, modes: usize) -> Self {
        let mut out = Self::zeros(modes);
        for k in 1..=modes.min(self.modes) as i64 {
            out.set_mode(k, self.coeff(k));
        }
        out
    }

    /// Upper bound on `sup_x |f(x)|` from the coefficient ℓ¹ norm.
    pub fn sup_bound(&self) -> f64 {
        2.0 * self.positive().iter().map(|c| c.norm()).sum::<f64>()
    }

    pub fn to_file_json(&self) -> FieldFile {
        FieldFile {
            modes: self.modes,
            coeffs: self
                .positive()
                .iter()
                .enumerate()
                .map(|(i, c)| (i as i64 + 1, c.re, c.im))
                .collect(),
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_file_json())?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: FieldFile = serde_json::from_str(text)?;
        file.into_field()
    }
}

/// On-disk field layout: `{"K": int, "coeffs": [[k, re, im], ...]}` with
/// `k >= 1` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    #[serde(rename = "K")]
    pub modes: usize,
    pub coeffs: Vec<(i64, f64, f64)>,
}

impl FieldFile {
    pub fn into_field(self) -> Result<FourierField> {
        if self.modes == 0 || self.modes > MAX_MODES {
            return Err(Error::InvalidField(format!(
                "K = {} outside the supported range 1..={MAX_MODES}",
                self.modes
            )));
        }
        let mut seen = vec![false; self.modes + 1];
        let mut f = FourierField::zeros(self.modes);
        for &(k, re, im) in &self.coeffs {
            if k < 1 || k as usize > self.modes {
                return Err(Error::InvalidField(format!(
                    "mode {k} outside 1..={} (negative modes and the mean are implied)",
                    self.modes
                )));
            }
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::InvalidField(format!("non-finite coefficient at k = {k}")));
            }
            if std::mem::replace(&mut seen[k as usize], true) {
                return Err(Error::InvalidField(format!("duplicate mode {k}")));
            }
            f.set_mode(k, Complex64::new(re, im));
        }
        Ok(f)
    }
}

/// Deterministic test data: `c_k = amplitude · k^{-decay} · e^{iφ_k}` with
/// phases drawn from a seeded ChaCha stream.
pub fn random_field(modes: usize, amplitude: f64, decay: f64, seed: u64) -> FourierField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = FourierField::zeros(modes);
    for k in 1..=modes {
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mag = amplitude * (k as f64).powf(-decay);
        f.set_mode(k as i64, Complex64::from_polar(mag, phase));
    }
    f
}

/// Shape of the initial data used by the amplitude experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    /// `cos(mode · x)`.
    Cos { mode: usize },
    /// [`random_field`] shape.
    Random { decay: f64, seed: u64 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Cos { mode: 1 }
    }
}

impl Profile {
    /// The profile scaled so that [`FourierField::sup_bound`] equals `amplitude`.
    pub fn field(&self, modes: usize, amplitude: f64) -> Result<FourierField> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: format!("{amplitude} is not a finite non-negative number"),
            });
        }
        let shape = match *self {
            Profile::Cos { mode } => {
                if mode == 0 || mode > modes {
                    return Err(Error::InvalidParameter {
                        name: "profile",
                        reason: format!("cos mode {mode} outside 1..={modes}"),
                    });
                }
                FourierField::cos_mode(modes, mode, 1.0)
            }
            Profile::Random { decay, seed } => {
                if !decay.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "profile",
                        reason: "decay must be finite".into(),
                    });
                }
                random_field(modes, 1.0, decay, seed)
            }
        };
        Ok(shape.scale(amplitude / shape.sup_bound()))
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Cos { mode } => write!(f, "cos:{mode}"),
            Profile::Random { decay, seed } => write!(f, "random:{decay}:{seed}"),
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;

    /// `cos:<mode>` or `random:<decay>:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad profile '{s}', expected cos:<mode> or random:<decay>:<seed>"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["cos", m] => Ok(Profile::Cos { mode: m.parse().map_err(|_| bad())? }),
            ["random", d, seed] => Ok(Profile::Random {
                decay: d.parse().map_err(|_| bad())?,
                seed: seed.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Brute-force truncated convolution `(f g)_k = Σ_j f_{k-j} g_j`, `|k| <= K`.
pub fn convolve_direct(f: &FourierField, g: &FourierField) -> Result<FourierField> {
    if f.modes() != g.modes() {
        return Err(Error::TruncationMismatch {
            left: f.modes(),
            right: g.modes(),
        });
    }
    let m = f.modes() as i64;
    let mut out = FourierField::zeros(f.modes());
    for k in 1..=m {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (k - m).max(-m)..=(k + m).min(m) {
            acc += f.coeff(k - j) * g.coeff(j);
        }
        out.set_mode(k, acc);
    }
    Ok(out)
}

/// Dealiased products at or below this truncation are summed directly.
pub const DIRECT_PRODUCT_LIMIT: usize = 128;

/// FFT plan pair for products of `K`-truncated fields.
///
/// With `dealias` the physical grid has at least `3K + 1` points, which is the
/// 3/2-padding form of the 2/3 rule: no product mode aliases back into
/// `[-K, K]`. Without it the grid has `2K + 2` points and aliasing is kept.
///
/// A dealiased product is exactly the truncated convolution. For
/// `K <= DIRECT_PRODUCT_LIMIT` it is summed directly instead: the cost is
/// comparable and each mode's rounding error stays relative to its own
/// terms, whereas the FFT leaves a floor of `ε · max|u|²` on every mode. The
/// floor matters once high Sobolev weights like `k^10` are applied.
#[derive(Clone)]
pub struct Convolver {
    modes: usize,
    grid: usize,
    direct: bool,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Convolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Convolver")
            .field("modes", &self.modes)
            .field("grid", &self.grid)
            .field("direct", &self.direct)
            .finish()
    }
}

impl Convolver {
    pub fn new(modes: usize, dealias: bool) -> Self {
        let min_grid = if dealias { 3 * modes + 1 } else { 2 * modes + 2 };
        // 2^a 3^b sizes keep rustfft on its fast radix paths.
        let grid = smooth_size_at_least(min_grid);
        let mut planner = FftPlanner::new();
        Self {
            modes,
            grid,
            direct: dealias && modes <= DIRECT_PRODUCT_LIMIT,
            forward: planner.plan_fft_forward(grid),
            inverse: planner.plan_fft_inverse(grid),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Always use the FFT, whatever the truncation.
    pub fn fft_only(mut self) -> Self {
        self.direct = false;
        self
    }

    /// Whether products bypass the FFT.
    pub fn uses_direct_sum(&self) -> bool {
        self.direct
    }

    fn direct_product(&self, f: &FourierField, g: &FourierField) -> FourierField {
        let m = self.modes as i64;
        let (a, b) = (f.dense(), g.dense());
        let mut dense = vec![Complex64::new(0.0, 0.0); 2 * self.modes + 1];
        for k in 1..=m {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in k - m..=m {
                acc += a[(k - j + m) as usize] * b[(j + m) as usize];
            }
            dense[(m + k) as usize] = acc;
            dense[(m - k) as usize] = acc.conj();
        }
        // Non-finite values pass through so the solver can report them.
        FourierField::project(self.modes, dense)
    }

    /// Physical samples `u(2πn/M)` of a field, real part only.
    pub fn to_physical(&self, f: &FourierField) -> Vec<f64> {
        let mut buf = self.spread(f.dense());
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn spread(&self, dense: &[Complex64]) -> Vec<Complex64> {
        let m = self.modes as i64;
        let n = self.grid as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid];
        for k in -m..=m {
            buf[k.rem_euclid(n) as usize] = dense[(k + m) as usize];
        }
        buf
    }

    /// Forward transform of real samples back onto `[-K, K]`, projected onto
    /// the field invariants.
    pub fn from_physical(&self, samples: &[f64]) -> FourierField {
        assert_eq!(samples.len(), self.grid);
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.grid as f64;
        let m = self.modes as i64;
        let n = self.grid as i64;
        let dense = (-m..=m)
            .map(|k| buf[k.rem_euclid(n) as usize] * scale)
            .collect();
        FourierField::project(self.modes, dense)
    }

    pub fn product(&self, f: &FourierField, g: &FourierField) -> FourierField {
        debug_assert_eq!(f.modes(), self.modes);
        debug_assert_eq!(g.modes(), self.modes);
        if self.direct {
            return self.direct_product(f, g);
        }
        let a = self.to_physical(f);
        let b = self.to_physical(g);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        self.from_physical(&prod)
    }

    pub fn square(&self, f: &FourierField) -> FourierField {
        if self.direct {
            return self.direct_product(f, f);
        }
        let a = self.to_physical(f);
        let prod: Vec<f64> = a.iter().map(|x| x * x).collect();
        self.from_physical(&prod)
    }
}

fn smooth_size_at_least(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p3 = 1usize;
    while p3 < best {
        let mut size = p3;
        while size < n {
            size *= 2;
        }
        best = best.min(size);
        p3 *= 3;
    }
    best
}
