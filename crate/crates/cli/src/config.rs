use std::path::Path;

use harmonic_paths::functional::BreakpointTable;
use harmonic_paths::{
    Channel, FrequencyProfile, Impulse, LocalFunction, PhysicalParams, ProfileKind, Representation,
    SmearingMode,
};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_STEPS: usize = 2000;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub t_a: f64,
    pub t_b: f64,
    pub mass: f64,
    pub hbar: f64,
    pub n_steps: Option<usize>,
    pub profile: ProfileKind,
    pub greens: Option<GreensConfig>,
    pub amplitude: Option<AmplitudeConfig>,
    pub correlator: Option<CorrelatorConfig>,
    pub diagrams: Option<DiagramsConfig>,
    pub validate: Option<ValidateConfig>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreensOutput {
    #[default]
    Green,
    Fundamental,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreensConfig {
    #[serde(default)]
    pub output: GreensOutput,
    pub representation: Option<Representation>,
    pub channel: Option<Channel>,
    pub intervals: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeConfig {
    pub representation: Representation,
    #[serde(default)]
    pub start: f64,
    #[serde(default)]
    pub end: f64,
    pub j: Option<BreakpointTable>,
    pub k: Option<BreakpointTable>,
    #[serde(default)]
    pub j_impulses: Vec<Impulse>,
    #[serde(default)]
    pub k_impulses: Vec<Impulse>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Insertion {
    pub time: f64,
    pub function: LocalFunction,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathEnds {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatorConfig {
    #[serde(default = "dirichlet")]
    pub representation: Representation,
    #[serde(default = "fresnel")]
    pub mode: SmearingMode,
    #[serde(default = "unit")]
    pub omega_ref: f64,
    pub classical: Option<PathEnds>,
    pub insertions: Vec<Insertion>,
}

fn dirichlet() -> Representation {
    Representation::DirichletX
}

fn fresnel() -> SmearingMode {
    SmearingMode::Fresnel
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramsConfig {
    pub vertex: String,
    #[serde(default = "second_order")]
    pub order: u32,
}

fn second_order() -> u32 {
    2
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub preset: Option<String>,
}

/// A parsed config with its profile and physical constants checked.
pub struct Loaded {
    pub config: Config,
    pub profile: FrequencyProfile,
    pub params: PhysicalParams,
    pub n_steps: usize,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: Config = toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let profile = FrequencyProfile::new(config.profile.clone(), config.t_a, config.t_b)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let params = PhysicalParams::new(config.mass, config.hbar)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let n_steps = config.n_steps.unwrap_or(DEFAULT_STEPS);
    if n_steps < 2 {
        return Err(CliError::Config("n_steps must be at least 2".into()));
    }
    if let Some(a) = &config.amplitude {
        for table in a.j.iter().chain(&a.k) {
            table
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
    }
    if let Some(v) = &config.validate {
        if v.preset.as_deref().is_some_and(|p| p != "full") {
            return Err(CliError::Config("validate preset must be \"full\"".into()));
        }
    }
    Ok(Loaded {
        config,
        profile,
        params,
        n_steps,
    })
}

pub fn section<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    section
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
}
