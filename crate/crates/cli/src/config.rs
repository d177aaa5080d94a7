use std::fs;
use std::path::{Path, PathBuf};

use relaxforge::construct::ConstructOptions;
use relaxforge::relax::{epsilon_schedule, SolverOptions, StepRule};
use relaxforge::{Builtin, Expression, Minorant, Mode, SampledLagrangian, Vector};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lagrangian: LagrangianSpec,
    pub grid: Option<GridSpec>,
    pub domain: GridSpec,
    #[serde(default)]
    pub phi: PhiSpec,
    pub epsilon: f64,
    /// Explicit decreasing schedule; defaults to `ε 2^{−n}` for `schedule_steps` terms.
    pub schedule: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub schedule_steps: usize,
    #[serde(default = "practical")]
    pub mode: String,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub construct: ConstructSpec,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

fn practical() -> String {
    Mode::Practical.to_string()
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianSpec {
    pub builtin: Option<String>,
    /// CSV table `x1[,x2],value`; relative paths resolve against the config.
    pub table: Option<PathBuf>,
    /// Required with `table`; overrides the builtin bound otherwise.
    pub minorant: Option<MinorantSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MinorantSpec {
    Linear { c1: f64, c2: f64 },
    Quadratic { a: f64, b: f64 },
    Table { knots: Vec<[f64; 2]> },
}

impl MinorantSpec {
    fn to_minorant(&self) -> Minorant {
        match self {
            MinorantSpec::Linear { c1, c2 } => Minorant::Linear { c1: *c1, c2: *c2 },
            MinorantSpec::Quadratic { a, b } => Minorant::Quadratic { a: *a, b: *b },
            MinorantSpec::Table { knots } => Minorant::Table(knots.iter().map(|k| (k[0], k[1])).collect()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub bounds: Vec<[f64; 2]>,
    pub resolution: Vec<usize>,
}

impl GridSpec {
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.iter().map(|b| (b[0], b[1])).collect()
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    #[default]
    Zero,
    Affine {
        #[serde(default)]
        constant: f64,
        gradient: Vec<f64>,
    },
    SineBump { amplitude: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub max_iterations: usize,
    pub step: String,
    /// Constant `c` of the diminishing rule.
    pub step_constant: Option<f64>,
    pub tolerance: f64,
    pub restarts: usize,
    pub perturbation: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            max_iterations: d.max_iterations,
            step: "auto".into(),
            step_constant: None,
            tolerance: d.tolerance,
            restarts: d.restarts,
            perturbation: d.perturbation,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstructSpec {
    pub theta_cover: f64,
    pub rho: f64,
    pub max_rounds: usize,
    pub cellina_rounds: usize,
    pub candidate_cap: usize,
}

impl Default for ConstructSpec {
    fn default() -> Self {
        let d = ConstructOptions::default();
        Self {
            theta_cover: d.theta_cover,
            rho: d.rho,
            max_rounds: d.max_rounds,
            cellina_rounds: d.cellina_rounds,
            candidate_cap: d.candidate_cap,
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates; relative paths are rebased onto the config's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let mut cfg: Self = toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(t) = &cfg.lagrangian.table {
            if t.is_relative() {
                cfg.lagrangian.table = Some(base.join(t));
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        match (&self.lagrangian.builtin, &self.lagrangian.table) {
            (Some(_), Some(_)) | (None, None) => return bad("lagrangian needs exactly one of builtin or table".into()),
            (None, Some(t)) => {
                if self.lagrangian.minorant.is_none() {
                    return bad("a table lagrangian needs a minorant".into());
                }
                if !t.is_file() {
                    return bad(format!("lagrangian table {} does not exist", t.display()));
                }
            }
            (Some(b), None) => {
                b.parse::<Builtin>().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.schedule_steps == 0 {
            return bad("schedule_steps must be at least 1".into());
        }
        let dim = self.domain.bounds.len();
        if !(1..=2).contains(&dim) || self.domain.resolution.len() != dim {
            return bad("domain bounds and resolution must agree in dimension 1 or 2".into());
        }
        if let Some(g) = &self.grid {
            if g.bounds.len() != g.resolution.len() {
                return bad("grid bounds and resolution disagree".into());
            }
        }
        if let PhiSpec::Affine { gradient, .. } = &self.phi {
            if gradient.len() != dim {
                return bad(format!("phi gradient has {} entries, domain is {dim}-dimensional", gradient.len()));
            }
        }
        self.mode()?;
        self.solver_options()?;
        Ok(())
    }

    pub fn lagrangian(&self) -> Result<SampledLagrangian, ConfigError> {
        let err = |e: relaxforge::EnvelopeError| ConfigError::Invalid(e.to_string());
        if let Some(path) = &self.lagrangian.table {
            let m = self.lagrangian.minorant.as_ref().expect("validated").to_minorant();
            return relaxforge::envelope::read_table(path, m).map_err(err);
        }
        let b: Builtin = self.lagrangian.builtin.as_deref().expect("validated").parse().map_err(err)?;
        let (bounds, res) = match &self.grid {
            Some(g) => (g.bounds(), g.resolution.clone()),
            None => b.default_grid(),
        };
        let minorant = self.lagrangian.minorant.as_ref().map_or_else(|| b.minorant(), MinorantSpec::to_minorant);
        SampledLagrangian::from_fn(&bounds, &res, minorant, Some(b), |x| b.eval(x)).map_err(err)
    }

    pub fn phi(&self) -> Expression {
        match &self.phi {
            PhiSpec::Zero => Expression::Zero,
            PhiSpec::Affine { constant, gradient } => {
                let mut g: Vector = [0.0; 2];
                g[..gradient.len()].copy_from_slice(gradient);
                Expression::Affine { constant: *constant, gradient: g }
            }
            PhiSpec::SineBump { amplitude } => Expression::SineBump { amplitude: *amplitude },
        }
    }

    pub fn schedule(&self) -> Vec<f64> {
        self.schedule.clone().unwrap_or_else(|| epsilon_schedule(self.epsilon, self.schedule_steps))
    }

    pub fn solver_options(&self) -> Result<SolverOptions, ConfigError> {
        let s = &self.solver;
        let mut step: StepRule = s.step.parse().map_err(ConfigError::Invalid)?;
        if let (StepRule::Diminishing { c }, Some(k)) = (&mut step, s.step_constant) {
            *c = k;
        }
        if !(s.tolerance > 0.0) {
            return Err(ConfigError::Invalid(format!("solver tolerance must be positive, got {}", s.tolerance)));
        }
        Ok(SolverOptions {
            max_iterations: s.max_iterations,
            step,
            tolerance: s.tolerance,
            restarts: s.restarts,
            seed: self.seed,
            perturbation: s.perturbation,
        })
    }

    pub fn mode(&self) -> Result<Mode, ConfigError> {
        self.mode.parse().map_err(|e: String| ConfigError::Invalid(e))
    }

    pub fn construct_options(&self) -> ConstructOptions {
        let c = &self.construct;
        ConstructOptions {
            epsilon: self.epsilon,
            mode: self.mode().expect("validated"),
            theta_cover: c.theta_cover,
            rho: c.rho,
            max_rounds: c.max_rounds,
            cellina_rounds: c.cellina_rounds,
            candidate_cap: c.candidate_cap,
        }
    }
}
