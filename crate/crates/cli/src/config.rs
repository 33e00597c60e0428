use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use circlesym::certify::Tolerances;
use circlesym::construct::{AlphaPerturbation, OmegaStrategy, DEFAULT_GRID, DEFAULT_K, DEFAULT_TUBE_RADIUS};
use circlesym::flow::DEFAULT_STEP;
use circlesym::forms::Point;
use serde::{Deserialize, Serialize};

use crate::scenarios;
use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Construct,
    Certify,
    ConeQuery,
    FlowDemo,
    Decompose,
}

/// One scenario. Every section except `psi` has defaults; `psi` is required
/// by every mode but `flow-demo`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub manifold: ManifoldConfig,
    #[serde(default)]
    pub psi: Option<PsiConfig>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub alpha_perturbation: Option<AlphaPerturbation>,
    #[serde(default)]
    pub flow: Option<FlowConfig>,
    #[serde(default)]
    pub io: IoConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifoldConfig {
    pub monodromy: [[i64; 2]; 2],
    pub euler: [i64; 3],
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        Self { monodromy: [[1, 0], [0, 1]], euler: [0; 3] }
    }
}

/// `ψ = p*σ + τ·η` in the coordinate bases of `H²(T³)` and `H¹(T³)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiConfig {
    pub sigma: [f64; 3],
    pub tau: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    #[serde(rename = "K")]
    pub k: usize,
    pub grid: usize,
    pub rk4_step: f64,
    pub tube_radius: f64,
    pub strategy: OmegaStrategy,
    pub tolerances: Tolerances,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            grid: DEFAULT_GRID,
            rk4_step: DEFAULT_STEP,
            tube_radius: DEFAULT_TUBE_RADIUS,
            strategy: OmegaStrategy::Auto,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    /// Constant coefficients of `α`; defaults to the `τ`-part of `ψ`.
    #[serde(default)]
    pub alpha: Option<[f64; 3]>,
    pub curve: CurveSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_separation")]
    pub min_separation: f64,
    #[serde(default = "default_flow_tolerance")]
    pub tolerance: f64,
}

fn default_samples() -> usize {
    1024
}

fn default_separation() -> f64 {
    1e-3
}

fn default_flow_tolerance() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSpec {
    Geodesic {
        base: Point,
        homology: [i64; 3],
    },
    /// `base + t·homology` plus a random trigonometric wiggle.
    Wiggly {
        base: Point,
        homology: [i64; 3],
        amplitude: f64,
        harmonics: usize,
        seed: u64,
    },
    /// Curve JSON `{homology, samples: [[t, x, y, θ], ...]}`.
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    pub output_dir: PathBuf,
    pub csv: bool,
    /// Serialized `ω` read by `certify` mode.
    pub omega: Option<PathBuf>,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self { output_dir: PathBuf::from("out"), csv: false, omega: None }
    }
}

/// Where a scenario came from; relative input paths resolve against it.
#[derive(Clone, Debug, PartialEq)]
pub enum Origin {
    File(PathBuf),
    Builtin(&'static str),
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub origin: Origin,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = read_input(path)?;
        let config = parse(&text, &path.display().to_string())?;
        Ok(Self { config, origin: Origin::File(path.to_path_buf()) })
    }

    pub fn builtin(name: &str) -> Result<Self, CliError> {
        let (name, text) = scenarios::lookup(name).ok_or_else(|| {
            CliError::Usage(format!("no built-in scenario '{name}'; known: {}", scenarios::names().join(", ")))
        })?;
        let config = parse(text, name)?;
        Ok(Self { config, origin: Origin::Builtin(name) })
    }

    /// Reads an input named in the config: relative to the config file, or
    /// from the built-in set for built-in scenarios.
    pub fn read_relative(&self, path: &Path) -> Result<String, CliError> {
        match &self.origin {
            Origin::File(cfg) if path.is_relative() => read_input(&cfg.parent().unwrap_or(Path::new(".")).join(path)),
            Origin::Builtin(_) if path.is_relative() => {
                let name = path.to_string_lossy();
                match scenarios::data_file(&name) {
                    Some(text) => Ok(text.to_string()),
                    None => Err(CliError::Missing(path.to_path_buf())),
                }
            }
            _ => read_input(path),
        }
    }

    pub fn source_name(&self) -> String {
        match &self.origin {
            Origin::File(p) => p.display().to_string(),
            Origin::Builtin(name) => (*name).to_string(),
        }
    }
}

pub(crate) fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::Missing(path.to_path_buf()),
        _ => CliError::Io { path: path.to_path_buf(), source: e },
    })
}

/// Parses and validates; errors name the offending field and position.
pub fn parse(text: &str, source: &str) -> Result<ScenarioConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        let message = if field == "." { inner.to_string() } else { format!("{field}: {inner}") };
        CliError::Config { origin: source.to_string(), message }
    })?;
    de.end().map_err(|e| CliError::Config { origin: source.to_string(), message: e.to_string() })?;
    config.validate().map_err(|message| CliError::Config { origin: source.to_string(), message })?;
    Ok(config)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), String> {
        let n = &self.numerics;
        if n.k == 0 {
            return Err("numerics.K: must be at least 1".into());
        }
        if n.grid < 2 {
            return Err("numerics.grid: must be at least 2".into());
        }
        if !(n.rk4_step > 0.0 && n.rk4_step <= 0.5) {
            return Err(format!("numerics.rk4_step: {} must lie in (0, 1/2]", n.rk4_step));
        }
        if !(n.tube_radius > 0.0 && n.tube_radius < 0.5) {
            return Err(format!("numerics.tube_radius: {} must lie in (0, 1/2)", n.tube_radius));
        }
        let t = &n.tolerances;
        for (name, v) in [("closedness", t.closedness), ("periods", t.periods), ("square", t.square)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("numerics.tolerances.{name}: must be finite and non-negative"));
            }
        }
        if !t.positivity.is_finite() {
            return Err("numerics.tolerances.positivity: must be finite".into());
        }
        let [[a, b], [c, d]] = self.manifold.monodromy;
        if a * d - b * c != 1 {
            return Err(format!("manifold.monodromy: determinant {} is not 1", a * d - b * c));
        }
        if let Some(psi) = &self.psi {
            if psi.sigma.iter().chain(&psi.tau).any(|v| !v.is_finite()) {
                return Err("psi: entries must be finite".into());
            }
        } else if self.mode != Mode::FlowDemo {
            return Err(format!("psi: required in {} mode", self.mode.name()));
        }
        if let Some(p) = &self.alpha_perturbation {
            if !(p.radius > 0.0 && p.radius <= 0.5) {
                return Err(format!("alpha_perturbation.radius: {} must lie in (0, 1/2]", p.radius));
            }
            if !p.amplitude.is_finite() || p.center.iter().any(|v| !v.is_finite()) {
                return Err("alpha_perturbation: entries must be finite".into());
            }
        }
        if self.mode == Mode::Certify && self.io.omega.is_none() {
            return Err("io.omega: required in certify mode".into());
        }
        if self.mode == Mode::FlowDemo {
            let Some(flow) = &self.flow else {
                return Err("flow: required in flow-demo mode".into());
            };
            if flow.alpha.is_none() && self.psi.is_none() {
                return Err("flow.alpha: required when psi is absent".into());
            }
            if flow.samples < 8 {
                return Err("flow.samples: must be at least 8".into());
            }
            if !(flow.tolerance > 0.0) {
                return Err("flow.tolerance: must be positive".into());
            }
            if let CurveSpec::Wiggly { amplitude, harmonics, .. } = flow.curve {
                if !amplitude.is_finite() || harmonics == 0 {
                    return Err("flow.curve: wiggly curves need a finite amplitude and at least one harmonic".into());
                }
            }
        }
        Ok(())
    }
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Construct => "construct",
            Mode::Certify => "certify",
            Mode::ConeQuery => "cone-query",
            Mode::FlowDemo => "flow-demo",
            Mode::Decompose => "decompose",
        }
    }
}
