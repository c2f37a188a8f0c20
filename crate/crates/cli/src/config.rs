//! Run configuration: line-oriented `section.key = value` text.
//!
//! Blank lines and everything after `#` are ignored. Every key appears at
//! most once; unknown keys are errors. [`KEYS`] lists every key with its
//! default, and [`RunConfig::to_canonical`] writes all of them back in that
//! order, so emitting and re-parsing gives the same configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use spgs::grid::GridSpec;
use spgs::minimize::format_real;
use spgs::potential::Singularity;

/// `(key, default, description)`; a `None` default marks a required key.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("grid.L", None, "box half-width; the box is [-L, L]^3"),
    ("grid.n", None, "points per axis"),
    (
        "grid.staggered",
        Some("true"),
        "nodes at cell centres (no node at the origin)",
    ),
    (
        "potential.kind",
        None,
        "constant | coulomb | gaussian-well | tabulated",
    ),
    (
        "potential.V1",
        None,
        "constant part V1 (the base level for gaussian-well)",
    ),
    (
        "potential.lambda",
        Some("0"),
        "coupling of the singular or Gaussian term",
    ),
    (
        "potential.alpha",
        Some("1"),
        "singularity exponent for coulomb, 1 or 2",
    ),
    ("potential.amplitude", Some("0.2"), "gaussian-well depth"),
    ("potential.width", Some("1"), "gaussian-well width"),
    ("potential.file", Some(""), "field dump of V for tabulated"),
    ("solver.p", None, "nonlinearity exponent, 3 < p < 5"),
    ("solver.step", Some("1"), "initial descent step"),
    (
        "solver.tol",
        Some("1e-7"),
        "stop when the residual falls below tol * ||u||",
    ),
    (
        "solver.max_iters",
        Some("2000"),
        "iteration budget per start",
    ),
    ("solver.seed", Some("0"), "seed for every random draw"),
    (
        "solver.starts",
        Some("1"),
        "number of descent starts; extra starts are random",
    ),
    ("solver.init", Some("default"), "default | blob | file"),
    ("solver.init_center", Some("0,0,0"), "blob centre"),
    ("solver.init_width", Some("1"), "blob width"),
    ("solver.init_amplitude", Some("1"), "blob amplitude"),
    (
        "solver.init_file",
        Some(""),
        "field dump used when solver.init = file",
    ),
    (
        "solver.override_coercivity",
        Some("false"),
        "run even if the coercivity gate fails",
    ),
    (
        "run.mode",
        Some("solve"),
        "solve | sweep-lambda | compare-vinf | validate | radial-crosscheck",
    ),
    (
        "run.output_dir",
        Some("out"),
        "parent directory of the run directory",
    ),
    ("run.jobs", Some("1"), "concurrent runs in sweep-lambda"),
    (
        "sweep.lambdas",
        Some("1,2,4"),
        "constant potential levels for sweep-lambda",
    ),
    (
        "radial.n_r",
        Some("2048"),
        "radial nodes for radial-crosscheck",
    ),
    (
        "radial.r_max",
        Some("30"),
        "radial outer radius for radial-crosscheck",
    ),
    (
        "validate.trials",
        Some("20"),
        "random fields per check in validate",
    ),
];

/// A configuration error, resolved to a key and a line where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(key: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            key: Some(key.to_string()),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    SweepLambda,
    CompareVinf,
    Validate,
    RadialCrosscheck,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Solve,
        Mode::SweepLambda,
        Mode::CompareVinf,
        Mode::Validate,
        Mode::RadialCrosscheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::SweepLambda => "sweep-lambda",
            Mode::CompareVinf => "compare-vinf",
            Mode::Validate => "validate",
            Mode::RadialCrosscheck => "radial-crosscheck",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Constant,
    Coulomb,
    GaussianWell,
    Tabulated,
}

impl PotentialKind {
    pub fn name(self) -> &'static str {
        match self {
            PotentialKind::Constant => "constant",
            PotentialKind::Coulomb => "coulomb",
            PotentialKind::GaussianWell => "gaussian-well",
            PotentialKind::Tabulated => "tabulated",
        }
    }
}

impl FromStr for PotentialKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            PotentialKind::Constant,
            PotentialKind::Coulomb,
            PotentialKind::GaussianWell,
            PotentialKind::Tabulated,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown potential kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Default,
    Blob,
    File,
}

impl InitKind {
    pub fn name(self) -> &'static str {
        match self {
            InitKind::Default => "default",
            InitKind::Blob => "blob",
            InitKind::File => "file",
        }
    }
}

impl FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [InitKind::Default, InitKind::Blob, InitKind::File]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown init `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
    pub staggered: bool,
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.half_width, self.points, self.staggered)
            .expect("validated when the configuration was parsed")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    pub v1: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub amplitude: f64,
    pub width: f64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub p: f64,
    pub step: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub starts: usize,
    pub init: InitKind,
    pub init_center: [f64; 3],
    pub init_width: f64,
    pub init_amplitude: f64,
    pub init_file: String,
    pub override_coercivity: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub solver: SolverSection,
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub jobs: usize,
    pub lambdas: Vec<f64>,
    pub radial_n_r: usize,
    pub radial_r_max: f64,
    pub validate_trials: usize,
}

/// Raw entries: key → (value, line).
pub type Entries = BTreeMap<String, (String, Option<usize>)>;

/// Splits `text` into entries, rejecting malformed lines, unknown keys and
/// duplicates.
pub fn parse_entries(text: &str) -> Result<Entries, ConfigError> {
    let mut entries = Entries::new();
    for (index, raw) in text.lines().enumerate() {
        let line = Some(index + 1);
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError {
                key: None,
                line,
                message: format!("expected `section.key = value`, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        insert_entry(&mut entries, key, value, line)?;
    }
    Ok(entries)
}

/// Adds one `key = value` entry; later entries for the same key are errors
/// unless `replace` is used.
fn insert_entry(
    entries: &mut Entries,
    key: &str,
    value: &str,
    line: Option<usize>,
) -> Result<(), ConfigError> {
    if !KEYS.iter().any(|(k, _, _)| *k == key) {
        return Err(ConfigError::at(key, line, "unknown key"));
    }
    if let Some((_, first)) = entries.get(key) {
        let message = match first {
            Some(first) => format!("duplicate key, first set on line {first}"),
            None => "duplicate key".to_string(),
        };
        return Err(ConfigError::at(key, line, message));
    }
    entries.insert(key.to_string(), (value.to_string(), line));
    Ok(())
}

/// Applies a `key=value` override, replacing any earlier value.
pub fn apply_override(entries: &mut Entries, assignment: &str) -> Result<(), ConfigError> {
    let Some((key, value)) = assignment.split_once('=') else {
        return Err(ConfigError {
            key: None,
            line: None,
            message: format!("override must look like key=value, got `{assignment}`"),
        });
    };
    let key = key.trim();
    entries.remove(key);
    insert_entry(entries, key, value.trim(), None)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::from_entries(&parse_entries(text)?)
}

struct Reader<'a> {
    entries: &'a Entries,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> (&str, Option<usize>) {
        match self.entries.get(key) {
            Some((value, line)) => (value.as_str(), *line),
            None => {
                let default = KEYS
                    .iter()
                    .find(|(k, _, _)| *k == key)
                    .and_then(|(_, d, _)| *d)
                    .expect("required keys are checked before reading");
                (default, None)
            }
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let (value, line) = self.raw(key);
        value
            .parse()
            .map_err(|e| ConfigError::at(key, line, format!("cannot parse `{value}`: {e}")))
    }

    fn real(&self, key: &str) -> Result<f64, ConfigError> {
        let value: f64 = self.get(key)?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.invalid(key, format!("must be finite, got {value}")))
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let (value, line) = self.raw(key);
        value
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        ConfigError::at(key, line, format!("`{item}` is not a finite number"))
                    })
            })
            .collect()
    }

    fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::at(key, self.raw(key).1, message)
    }
}

impl RunConfig {
    pub fn from_entries(entries: &Entries) -> Result<Self, ConfigError> {
        let missing: Vec<&str> = KEYS
            .iter()
            .filter(|(k, d, _)| d.is_none() && !entries.contains_key(*k))
            .map(|(k, _, _)| *k)
            .collect();
        if !missing.is_empty() {
            return Err(ConfigError {
                key: Some(missing[0].to_string()),
                line: None,
                message: format!("missing required keys: {}", missing.join(", ")),
            });
        }
        let r = Reader { entries };

        let grid = GridConfig {
            half_width: r.real("grid.L")?,
            points: r.get("grid.n")?,
            staggered: r.get("grid.staggered")?,
        };
        if grid.half_width <= 0.0 {
            return Err(r.invalid("grid.L", "must be positive"));
        }
        if let Err(e) = GridSpec::new(grid.half_width, grid.points, grid.staggered) {
            return Err(r.invalid("grid.n", e.to_string()));
        }

        let potential = PotentialConfig {
            kind: r.get("potential.kind")?,
            v1: r.real("potential.V1")?,
            lambda: r.real("potential.lambda")?,
            alpha: r.real("potential.alpha")?,
            amplitude: r.real("potential.amplitude")?,
            width: r.real("potential.width")?,
            file: r.get("potential.file")?,
        };
        if potential.lambda < 0.0 {
            return Err(r.invalid("potential.lambda", "must be >= 0"));
        }
        if let Err(e) = Singularity::from_alpha(potential.alpha) {
            return Err(r.invalid("potential.alpha", e.to_string()));
        }
        match potential.kind {
            PotentialKind::Coulomb if !grid.staggered => {
                return Err(r.invalid(
                    "grid.staggered",
                    "a singular potential needs a staggered grid",
                ));
            }
            PotentialKind::GaussianWell if potential.width <= 0.0 => {
                return Err(r.invalid("potential.width", "must be positive"));
            }
            PotentialKind::Tabulated if potential.file.is_empty() => {
                return Err(r.invalid("potential.file", "tabulated potential needs a file"));
            }
            _ => {}
        }

        let center = r.list("solver.init_center")?;
        let init_center: [f64; 3] = center
            .try_into()
            .map_err(|_| r.invalid("solver.init_center", "needs three comma-separated numbers"))?;
        let solver = SolverSection {
            p: r.real("solver.p")?,
            step: r.real("solver.step")?,
            tol: r.real("solver.tol")?,
            max_iters: r.get("solver.max_iters")?,
            seed: r.get("solver.seed")?,
            starts: r.get("solver.starts")?,
            init: r.get("solver.init")?,
            init_center,
            init_width: r.real("solver.init_width")?,
            init_amplitude: r.real("solver.init_amplitude")?,
            init_file: r.get("solver.init_file")?,
            override_coercivity: r.get("solver.override_coercivity")?,
        };
        if let Err(e) = solver
            .to_solver_config(spgs::minimize::Init::Default)
            .validate()
        {
            let key = match e {
                spgs::Error::InvalidArgument { name, .. } => format!("solver.{name}"),
                _ => "solver.p".to_string(),
            };
            return Err(r.invalid(&key, e.to_string()));
        }
        match solver.init {
            InitKind::Blob if solver.init_width <= 0.0 => {
                return Err(r.invalid("solver.init_width", "must be positive"));
            }
            InitKind::File if solver.init_file.is_empty() => {
                return Err(r.invalid("solver.init_file", "init = file needs a file"));
            }
            _ => {}
        }

        let jobs: usize = r.get("run.jobs")?;
        if jobs == 0 {
            return Err(r.invalid("run.jobs", "must be at least 1"));
        }
        let lambdas = r.list("sweep.lambdas")?;
        if lambdas.iter().any(|&l| l <= 0.0) {
            return Err(r.invalid("sweep.lambdas", "every level must be positive"));
        }
        let mut sorted = lambdas.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(r.invalid("sweep.lambdas", "levels must be distinct"));
        }
        let radial_n_r: usize = r.get("radial.n_r")?;
        if radial_n_r < 2 {
            return Err(r.invalid("radial.n_r", "need at least 2 nodes"));
        }
        let radial_r_max = r.real("radial.r_max")?;
        if radial_r_max <= 0.0 {
            return Err(r.invalid("radial.r_max", "must be positive"));
        }
        let validate_trials: usize = r.get("validate.trials")?;
        if validate_trials < 10 {
            return Err(r.invalid("validate.trials", "need at least 10"));
        }

        Ok(Self {
            grid,
            potential,
            solver,
            mode: r.get("run.mode")?,
            output_dir: PathBuf::from(r.raw("run.output_dir").0),
            jobs,
            lambdas,
            radial_n_r,
            radial_r_max,
            validate_trials,
        })
    }

    fn value_of(&self, key: &str) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|&x| format_real(x))
                .collect::<Vec<_>>()
                .join(",")
        };
        let (g, v, s) = (&self.grid, &self.potential, &self.solver);
        match key {
            "grid.L" => format_real(g.half_width),
            "grid.n" => g.points.to_string(),
            "grid.staggered" => g.staggered.to_string(),
            "potential.kind" => v.kind.name().to_string(),
            "potential.V1" => format_real(v.v1),
            "potential.lambda" => format_real(v.lambda),
            "potential.alpha" => format_real(v.alpha),
            "potential.amplitude" => format_real(v.amplitude),
            "potential.width" => format_real(v.width),
            "potential.file" => v.file.clone(),
            "solver.p" => format_real(s.p),
            "solver.step" => format_real(s.step),
            "solver.tol" => format_real(s.tol),
            "solver.max_iters" => s.max_iters.to_string(),
            "solver.seed" => s.seed.to_string(),
            "solver.starts" => s.starts.to_string(),
            "solver.init" => s.init.name().to_string(),
            "solver.init_center" => join(&s.init_center),
            "solver.init_width" => format_real(s.init_width),
            "solver.init_amplitude" => format_real(s.init_amplitude),
            "solver.init_file" => s.init_file.clone(),
            "solver.override_coercivity" => s.override_coercivity.to_string(),
            "run.mode" => self.mode.name().to_string(),
            "run.output_dir" => self.output_dir.display().to_string(),
            "run.jobs" => self.jobs.to_string(),
            "sweep.lambdas" => join(&self.lambdas),
            "radial.n_r" => self.radial_n_r.to_string(),
            "radial.r_max" => format_real(self.radial_r_max),
            "validate.trials" => self.validate_trials.to_string(),
            other => unreachable!("no such key {other}"),
        }
    }

    /// Every key, one per line, in [`KEYS`] order.
    pub fn to_canonical(&self) -> String {
        KEYS.iter()
            .map(|(k, _, _)| format!("{k} = {}\n", self.value_of(k)))
            .collect()
    }
}

impl SolverSection {
    pub fn to_solver_config(&self, init: spgs::minimize::Init) -> spgs::minimize::SolverConfig {
        spgs::minimize::SolverConfig {
            p: self.p,
            step: self.step,
            tol_residual: self.tol,
            max_iters: self.max_iters,
            init,
            seed: self.seed,
            starts: self.starts,
            override_coercivity: self.override_coercivity,
        }
    }
}

/// The key table as help text.
pub fn key_help() -> String {
    let mut out = String::from("Configuration keys (required keys have no default):\n");
    for (key, default, help) in KEYS {
        let default = match default {
            None => "required".to_string(),
            Some("") => "default: empty".to_string(),
            Some(d) => format!("default: {d}"),
        };
        out.push_str(&format!("  {key:<28} {help} [{default}]\n"));
    }
    out
}
