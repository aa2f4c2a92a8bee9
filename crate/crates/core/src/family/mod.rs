//! Equation families behind a common trait, registered by name.
//!
//! Every family is `∂_t u = A u + c_nl · u ∂_x u` with `A` a dispersion symbol
//! `iψ(k)`. The registry maps a name such as `"kawahara"` to its strategy
//! object; [`EquationFamily`] binds a strategy to concrete parameters.

mod fifth;
mod kawahara;
mod kdv;
mod seventh;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::duhamel::phase::{direct_difference, PhaseValue};
use crate::error::{Error, Result};
use crate::symbols::{check_hypotheses, HypothesesWitness, LinearSymbol, SymbolFamily};

pub use fifth::FifthOrder;
pub use kawahara::Kawahara;
pub use kdv::Kdv;
pub use seventh::SeventhOrder;

/// Scan depth used when a family certifies its own hypotheses.
pub const HYPOTHESES_SCAN: u64 = 256;

/// Physical parameters shared by the built-in families. Unused ones stay zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyParams {
    pub omega: f64,
    pub theta: f64,
    pub alpha: f64,
}

/// Sobolev indices `(s, p, p̃, q)` of a smoothing estimate
/// `‖S_D(T)u0‖_{s+p} <= c ‖u0‖_s ‖u0‖^q_{s+p̃}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingIndices {
    pub s: f64,
    pub p: f64,
    pub p_tilde: f64,
    pub q: f64,
}

pub trait DispersionFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Orders of the symbol, highest first.
    fn orders(&self) -> &'static [u32];

    /// `c_nl` in `c_nl · u ∂_x u`.
    fn nonlinear_coefficient(&self) -> f64;

    /// Positional preset arguments, e.g. `["theta", "alpha"]`.
    fn parameter_names(&self) -> &'static [&'static str];

    fn params_from_args(&self, args: &[f64]) -> Result<FamilyParams>;

    fn symbol(&self, params: &FamilyParams) -> Result<LinearSymbol>;

    /// Parameter boxes for the nonresonance hypotheses, always containing the
    /// coefficients of [`DispersionFamily::symbol`].
    fn parameter_family(&self, params: &FamilyParams) -> Result<SymbolFamily>;

    /// Parameters after removing a spatial mean `mean` from the data.
    fn shift_mean(&self, params: &FamilyParams, mean: f64) -> FamilyParams;

    /// Factored resonance function `ψ(k) - ψ(k-j) - ψ(j)`.
    fn phase(&self, params: &FamilyParams, k: i64, j: i64) -> Result<PhaseValue>;

    fn smoothing_indices(&self) -> SmoothingIndices;

    /// Sobolev index used for contraction factors.
    fn contraction_index(&self) -> f64 {
        self.smoothing_indices().s
    }
}

#[derive(Debug, Clone, Default)]
pub struct FamilyRegistry {
    families: BTreeMap<&'static str, Arc<dyn DispersionFamily>>,
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(FifthOrder));
        r.register(Arc::new(Kawahara));
        r.register(Arc::new(SeventhOrder));
        r.register(Arc::new(Kdv));
        r
    }

    /// Shared registry of the four built-in families.
    pub fn global() -> &'static Self {
        static REGISTRY: OnceLock<FamilyRegistry> = OnceLock::new();
        REGISTRY.get_or_init(Self::with_builtins)
    }

    /// Registers a family, replacing any previous one with the same name.
    pub fn register(&mut self, family: Arc<dyn DispersionFamily>) -> Option<Arc<dyn DispersionFamily>> {
        self.families.insert(family.name(), family)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn DispersionFamily>> {
        self.families
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownFamily(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.families.keys().copied()
    }

    /// Builds a family from a preset such as `kawahara(0.5, 0)` or a bare name
    /// (all parameters zero).
    pub fn preset(&self, spec: &str) -> Result<EquationFamily> {
        let (name, args) = parse_preset(spec)?;
        let kind = self.get(&name)?;
        let params = kind.params_from_args(&args)?;
        EquationFamily::new(kind, params)
    }

    pub fn build(&self, name: &str, params: FamilyParams) -> Result<EquationFamily> {
        EquationFamily::new(self.get(name)?, params)
    }
}

fn parse_preset(spec: &str) -> Result<(String, Vec<f64>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec.to_string(), Vec::new()));
    };
    let body = spec[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::Parse(format!("unterminated preset `{spec}`")))?;
    let args = body
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("preset argument `{s}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((spec[..open].trim().to_string(), args))
}

/// Fills positional preset arguments into `params` by name.
pub(crate) fn assign_args(
    family: &'static str,
    names: &[&'static str],
    args: &[f64],
) -> Result<FamilyParams> {
    if args.len() > names.len() {
        return Err(Error::InvalidParameter {
            name: "preset",
            reason: format!("{family} takes at most {} arguments", names.len()),
        });
    }
    let mut p = FamilyParams::default();
    for (name, value) in names.iter().zip(args) {
        if !value.is_finite() {
            return Err(Error::InvalidParameter {
                name,
                reason: "must be finite".into(),
            });
        }
        match *name {
            "omega" => p.omega = *value,
            "theta" => p.theta = *value,
            "alpha" => p.alpha = *value,
            _ => unreachable!("unknown parameter name"),
        }
    }
    Ok(p)
}

/// A registered family bound to concrete parameters.
#[derive(Clone)]
pub struct EquationFamily {
    kind: Arc<dyn DispersionFamily>,
    params: FamilyParams,
    symbol: LinearSymbol,
    nonlinear_coefficient: f64,
}

impl fmt::Debug for EquationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquationFamily")
            .field("name", &self.name())
            .field("params", &self.params)
            .field("symbol", &self.symbol)
            .field("nonlinear_coefficient", &self.nonlinear_coefficient)
            .finish()
    }
}

impl PartialEq for EquationFamily {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
            && self.params == other.params
            && self.nonlinear_coefficient == other.nonlinear_coefficient
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescription {
    pub name: String,
    pub params: FamilyParams,
    pub symbol: LinearSymbol,
    pub nonlinear_coefficient: f64,
}

impl EquationFamily {
    pub fn new(kind: Arc<dyn DispersionFamily>, params: FamilyParams) -> Result<Self> {
        let symbol = kind.symbol(&params)?;
        debug_assert_eq!(symbol.orders(), kind.orders());
        let nonlinear_coefficient = kind.nonlinear_coefficient();
        Ok(Self {
            kind,
            params,
            symbol,
            nonlinear_coefficient,
        })
    }

    /// Looks up a built-in family.
    pub fn builtin(name: &str, params: FamilyParams) -> Result<Self> {
        FamilyRegistry::global().build(name, params)
    }

    pub fn fifth(omega: f64) -> Self {
        Self::builtin("fifth", FamilyParams { omega, ..Default::default() }).expect("fifth")
    }

    pub fn kawahara(theta: f64, alpha: f64) -> Result<Self> {
        Self::builtin(
            "kawahara",
            FamilyParams {
                theta,
                alpha,
                ..Default::default()
            },
        )
    }

    pub fn seventh(alpha: f64) -> Self {
        Self::builtin("seventh", FamilyParams { alpha, ..Default::default() }).expect("seventh")
    }

    pub fn kdv(alpha: f64) -> Self {
        Self::builtin("kdv", FamilyParams { alpha, ..Default::default() }).expect("kdv")
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn kind(&self) -> &Arc<dyn DispersionFamily> {
        &self.kind
    }

    pub fn params(&self) -> FamilyParams {
        self.params
    }

    pub fn symbol(&self) -> &LinearSymbol {
        &self.symbol
    }

    pub fn nonlinear_coefficient(&self) -> f64 {
        self.nonlinear_coefficient
    }

    /// Same family with the nonlinear coefficient replaced (zero gives the
    /// linear flow).
    pub fn with_nonlinear_coefficient(&self, c: f64) -> Self {
        Self {
            nonlinear_coefficient: c,
            ..self.clone()
        }
    }

    pub fn smoothing_indices(&self) -> SmoothingIndices {
        self.kind.smoothing_indices()
    }

    pub fn contraction_index(&self) -> f64 {
        self.kind.contraction_index()
    }

    pub fn parameter_family(&self) -> Result<SymbolFamily> {
        self.kind.parameter_family(&self.params)
    }

    pub fn witness(&self) -> Result<HypothesesWitness> {
        check_hypotheses(&self.parameter_family()?, HYPOTHESES_SCAN)?.witness()
    }

    /// Family seen by the mean-zero part of data with spatial mean `mean`.
    pub fn shifted_mean(&self, mean: f64) -> Result<Self> {
        let params = self.kind.shift_mean(&self.params, mean);
        let mut out = Self::new(self.kind.clone(), params)?;
        out.nonlinear_coefficient = self.nonlinear_coefficient;
        Ok(out)
    }

    /// Factored phase `Φ(k, j)`.
    pub fn phase_value(&self, k: i64, j: i64) -> Result<PhaseValue> {
        self.kind.phase(&self.params, k, j)
    }

    /// `Φ(k, j) = ψ(k) - ψ(k-j) - ψ(j)` as a float; zero on excluded pairs.
    pub fn phase(&self, k: i64, j: i64) -> f64 {
        self.phase_value(k, j).map_or(0.0, |p| p.value())
    }

    /// `Φ(k, j)` from the symbol's terms by direct integer expansion.
    pub fn phase_direct(&self, k: i64, j: i64) -> f64 {
        self.symbol
            .terms()
            .iter()
            .map(|t| t.coefficient * direct_difference(t.order, k, j) as f64)
            .sum()
    }

    /// Whether the admissible pair `(k, j)` has a vanishing phase.
    pub fn is_resonant(&self, k: i64, j: i64) -> bool {
        match self.phase_value(k, j) {
            Ok(p) => {
                let scale = (p.integer as f64).abs() + (p.theta * p.theta_coefficient as f64).abs();
                p.value().abs() <= 1e-12 * scale
            }
            Err(_) => false,
        }
    }

    /// Admissible resonant pairs with `1 <= k <= modes`, `|j|, |k-j| <= modes`.
    pub fn resonant_pairs(&self, modes: usize) -> Vec<(i64, i64)> {
        let m = modes as i64;
        let mut out = Vec::new();
        for k in 1..=m {
            for j in (k - m).max(-m)..=m.min(k + m) {
                if crate::duhamel::phase::admissible(k, j) && self.is_resonant(k, j) {
                    out.push((k, j));
                }
            }
        }
        out
    }

    pub fn describe(&self) -> FamilyDescription {
        FamilyDescription {
            name: self.name().to_string(),
            params: self.params,
            symbol: self.symbol.clone(),
            nonlinear_coefficient: self.nonlinear_coefficient,
        }
    }
}

impl fmt::Display for EquationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.kind.parameter_names();
        let values: Vec<String> = names
            .iter()
            .map(|n| match *n {
                "omega" => self.params.omega,
                "theta" => self.params.theta,
                _ => self.params.alpha,
            })
            .map(|v| v.to_string())
            .collect();
        write!(f, "{}({})", self.name(), values.join(", "))
    }
}
