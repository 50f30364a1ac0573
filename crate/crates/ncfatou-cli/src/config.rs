use std::fmt;
use std::path::{Path, PathBuf};

use ncfatou::lebesgue::{RnInput, Schedule, SolverMode};
use ncfatou::oracle1d::{self, Atom, ClassicalMeasure};
use ncfatou::{MomentFunctional, NCSeries};
use serde::Deserialize;

/// Failure classes mapped onto process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad config or input files (exit 2).
    Validation(String),
    /// A numerical diagnostic failed (exit 3).
    Numerical(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ncfatou::Error> for Failure {
    fn from(e: ncfatou::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

pub fn invalid(field: &str, msg: impl fmt::Display) -> Failure {
    Failure::Validation(format!("{field}: {msg}"))
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ClassicalFatou,
    InnerSingular,
    Decompose,
    Factor,
    Majorant,
    Kernels,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ClassicalFatou => "classical-fatou",
            Experiment::InnerSingular => "inner-singular",
            Experiment::Decompose => "decompose",
            Experiment::Factor => "factor",
            Experiment::Majorant => "majorant",
            Experiment::Kernels => "kernels",
            Experiment::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    #[serde(default = "default_budget")]
    pub memory_budget_mb: f64,
}

fn default_tail_tol() -> f64 {
    1e-8
}
fn default_j_max() -> usize {
    10
}
fn default_budget() -> f64 {
    1024.0
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            tail_tol: default_tail_tol(),
            j_max: default_j_max(),
            memory_budget_mb: default_budget(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_null_tol")]
    pub null_tol: f64,
    #[serde(default = "default_cg_tol")]
    pub cg_tol: f64,
    #[serde(default = "default_singular_tol")]
    pub singular_tol: f64,
}

fn default_null_tol() -> f64 {
    1e-10
}
fn default_cg_tol() -> f64 {
    1e-10
}
fn default_singular_tol() -> f64 {
    0.05
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            null_tol: default_null_tol(),
            cg_tol: default_cg_tol(),
            singular_tol: default_singular_tol(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub angle: f64,
    pub weight: f64,
}

/// A `d = 1` measure: atoms plus a multiple of arc length.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomConfig>,
    #[serde(default)]
    pub lebesgue_weight: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    oracle1d::DEFAULT_GRID
}

/// Where the L-Toeplitz operator fed to the majorant check comes from.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TauSource {
    /// Gram matrix of the Clark measure (valid when that measure is absolutely continuous).
    Clark,
    /// `T = 0` (inner symbols).
    Zero,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Auto,
    Dense,
    Banded,
    MatrixFree,
}

impl From<SolverChoice> for SolverMode {
    fn from(s: SolverChoice) -> Self {
        match s {
            SolverChoice::Auto => SolverMode::Auto,
            SolverChoice::Dense => SolverMode::Dense,
            SolverChoice::Banded => SolverMode::Banded,
            SolverChoice::MatrixFree => SolverMode::MatrixFree,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub epsilon_grid: Option<Vec<f64>>,
    pub schur_series_file: Option<PathBuf>,
    pub moments_file: Option<PathBuf>,
    pub measure_spec: Option<MeasureSpec>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    pub r: Option<f64>,
    pub r_grid: Option<Vec<f64>>,
    pub solver: Option<SolverChoice>,
    pub tau: Option<TauSource>,
    pub points: Option<usize>,
    pub suite: Option<String>,
    /// Directory of the config file; relative input paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn check_radius(field: &str, r: f64) -> Result<(), Failure> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("{r} is not in (0, 1)")))
    }
}

fn check_positive(field: &str, x: f64) -> Result<(), Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{x} is not a positive number")))
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
        let mut cfg: Config = serde_json::from_str(&text).map_err(|e| invalid("config", e))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if !(1..=9).contains(&self.d) {
            return Err(invalid("d", format!("{} is not in 1..=9", self.d)));
        }
        if let Some(r) = self.r {
            check_radius("r", r)?;
        }
        if let Some(grid) = &self.r_grid {
            for (i, &r) in grid.iter().enumerate() {
                check_radius(&format!("r_grid[{i}]"), r)?;
            }
        }
        if let Some(eps) = &self.epsilon_grid {
            if eps.is_empty() {
                return Err(invalid("epsilon_grid", "must not be empty"));
            }
            for (i, &e) in eps.iter().enumerate() {
                check_positive(&format!("epsilon_grid[{i}]"), e)?;
            }
        }
        let s = &self.schedule;
        if !(s.tail_tol > 0.0 && s.tail_tol < 1.0) {
            return Err(invalid("schedule.tail_tol", format!("{} is not in (0, 1)", s.tail_tol)));
        }
        if s.j_max == 0 || s.j_max > 40 {
            return Err(invalid("schedule.j_max", format!("{} is not in 1..=40", s.j_max)));
        }
        check_positive("schedule.memory_budget_mb", s.memory_budget_mb)?;
        let t = &self.tolerances;
        check_positive("tolerances.null_tol", t.null_tol)?;
        check_positive("tolerances.cg_tol", t.cg_tol)?;
        check_positive("tolerances.singular_tol", t.singular_tol)?;
        let sources = [
            self.schur_series_file.is_some(),
            self.moments_file.is_some(),
            self.measure_spec.is_some(),
        ];
        if sources.iter().filter(|&&x| x).count() > 1 {
            return Err(invalid(
                "schur_series_file",
                "give at most one of schur_series_file, moments_file, measure_spec",
            ));
        }
        if let Some(spec) = &self.measure_spec {
            if self.d != 1 {
                return Err(invalid("measure_spec", "only available for d = 1"));
            }
            for (i, a) in spec.atoms.iter().enumerate() {
                if !(a.weight >= 0.0) {
                    return Err(invalid(
                        &format!("measure_spec.atoms[{i}].weight"),
                        "must be non-negative",
                    ));
                }
            }
            if !(spec.lebesgue_weight >= 0.0) {
                return Err(invalid("measure_spec.lebesgue_weight", "must be non-negative"));
            }
            if !spec.grid.is_power_of_two() {
                return Err(invalid(
                    "measure_spec.grid",
                    format!("{} is not a power of two", spec.grid),
                ));
            }
        }
        if let Some(0) = self.points {
            return Err(invalid("points", "must be at least 1"));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m.unwrap_or(8)
    }

    pub fn eps_grid(&self) -> Vec<f64> {
        self.epsilon_grid.clone().unwrap_or_else(|| vec![1.0])
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            tail_tol: self.schedule.tail_tol,
            j_max: self.schedule.j_max,
            memory_budget_mb: self.schedule.memory_budget_mb,
            ..Schedule::default()
        }
    }

    pub fn solver(&self) -> SolverMode {
        self.solver.map(SolverMode::from).unwrap_or(SolverMode::Auto)
    }

    pub fn require_n(&self) -> Result<usize, Failure> {
        self.n.ok_or_else(|| invalid("N", "required for this experiment"))
    }

    pub fn require_r(&self) -> Result<f64, Failure> {
        self.r.ok_or_else(|| invalid("r", "required for this experiment"))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn schur_series(&self) -> Result<Option<NCSeries>, Failure> {
        match &self.schur_series_file {
            None => Ok(None),
            Some(p) => NCSeries::read_csv(self.resolve(p), self.d)
                .map(Some)
                .map_err(|e| invalid("schur_series_file", e)),
        }
    }

    pub fn classical_measure(&self) -> Option<ClassicalMeasure> {
        self.measure_spec.as_ref().map(|spec| {
            let atoms = spec
                .atoms
                .iter()
                .map(|a| Atom {
                    angle: a.angle,
                    weight: a.weight,
                })
                .collect();
            let density = if spec.lebesgue_weight > 0.0 {
                vec![spec.lebesgue_weight; spec.grid]
            } else {
                Vec::new()
            };
            ClassicalMeasure { atoms, density }
        })
    }

    /// Moments from `moments_file` or `measure_spec`; the latter is expanded to grade `grade`.
    pub fn moments(&self, grade: usize) -> Result<Option<MomentFunctional>, Failure> {
        if let Some(p) = &self.moments_file {
            return MomentFunctional::read_csv(self.resolve(p), self.d)
                .map(Some)
                .map_err(|e| invalid("moments_file", e));
        }
        match self.classical_measure() {
            None => Ok(None),
            Some(mu) => oracle1d::classical_moments(&mu, grade)
                .map(Some)
                .map_err(|e| invalid("measure_spec", e)),
        }
    }

    /// The input of a Radon-Nikodym computation. Measure specs are expanded to grade `N`
    /// (default 64).
    pub fn rn_input(&self) -> Result<RnInput, Failure> {
        if let Some(b) = self.schur_series()? {
            return Ok(RnInput::Schur(b));
        }
        match self.moments(self.n.unwrap_or(64))? {
            Some(mu) => Ok(RnInput::Moments(mu)),
            None => Err(invalid(
                "schur_series_file",
                "one of schur_series_file, moments_file, measure_spec is required",
            )),
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        if let Some(dir) = std::env::var_os("NCFATOU_OUTDIR") {
            return PathBuf::from(dir);
        }
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(self.experiment.name()))
    }
}
