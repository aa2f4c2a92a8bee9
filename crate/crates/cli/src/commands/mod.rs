pub mod contract;
pub mod divisor;
pub mod duhamel;
pub mod identities;
pub mod simulate;
pub mod smoothing;

use dispersive_core::evolution::SolverConfig;
use dispersive_core::spectrum::Profile;
use dispersive_core::{EquationFamily, FamilyParams, FamilyRegistry};

use crate::CliError;

/// `family` is a preset such as `kawahara(0.5, 0)` or a bare name; explicit
/// parameter keys override the preset's values.
pub fn family(
    spec: &str,
    omega: Option<f64>,
    theta: Option<f64>,
    alpha: Option<f64>,
) -> Result<EquationFamily, CliError> {
    let registry = FamilyRegistry::global();
    let base = registry.preset(spec)?;
    if omega.is_none() && theta.is_none() && alpha.is_none() {
        return Ok(base);
    }
    let p = base.params();
    let params = FamilyParams {
        omega: omega.unwrap_or(p.omega),
        theta: theta.unwrap_or(p.theta),
        alpha: alpha.unwrap_or(p.alpha),
    };
    Ok(registry.build(base.name(), params)?)
}

/// `data` is `cos` or `random`.
pub fn profile(data: &str, mode: usize, decay: f64, seed: u64) -> Result<Profile, CliError> {
    match data {
        "cos" => Ok(Profile::Cos { mode }),
        "random" => Ok(Profile::Random { decay, seed }),
        other => Err(CliError::Usage(format!("data must be cos or random, got '{other}'"))),
    }
}

pub fn solver(modes: usize, dt: f64) -> Result<SolverConfig, CliError> {
    let cfg = SolverConfig::new(modes, dt);
    cfg.validate()?;
    Ok(cfg)
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
