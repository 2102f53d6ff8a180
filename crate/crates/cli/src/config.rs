use std::path::{Path, PathBuf};

use maass_lab::modgroup::UHPoint;
use maass_lab::multiplier::{MultiplierDescriptor, MultiplierSystem};
use maass_lab::subgroup::{CongruenceSubgroup, SubgroupKind};
use num_complex::Complex64;
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_VAR: &str = "MAASSLAB_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path} is not valid JSON for this input: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Core(#[from] maass_lab::Error),

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for numerical trouble, 2 for anything the caller got wrong.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            _ => 2,
        }
    }
}

pub fn core_exit_code(e: &maass_lab::Error) -> i32 {
    use maass_lab::Error as E;
    match e {
        E::NonConvergence { .. } | E::Internal(_) | E::ZDependence(_) => 1,
        E::InTerm { source, .. } => core_exit_code(source),
        _ => 2,
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i` or `a,b`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("'{text}' is not a complex number (expected a+bi)");
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((re, im)) = s.split_once(',') {
        return match (re.parse(), im.parse()) {
            (Ok(re), Ok(im)) => Ok(Complex64::new(re, im)),
            _ => Err(bad()),
        };
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s
            .parse()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[i..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

/// Parses `x,y` into a point of the upper half-plane.
pub fn parse_point(text: &str) -> Result<UHPoint, String> {
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| format!("'{text}' is not a point (expected x,y)"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("'{t}' is not a number"))
    };
    UHPoint::new(parse(x)?, parse(y)?).map_err(|e| e.to_string())
}

pub fn parse_kind(text: &str) -> Result<SubgroupKind, String> {
    match text.to_ascii_lowercase().as_str() {
        "gamma0" | "g0" => Ok(SubgroupKind::Gamma0),
        "gamma1" | "g1" => Ok(SubgroupKind::Gamma1),
        "gamma" | "principal" => Ok(SubgroupKind::Gamma),
        _ => Err(format!(
            "unknown subgroup kind '{text}' (gamma0, gamma1 or gamma)"
        )),
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })
}

pub fn load_multiplier(path: &Path) -> CliResult<MultiplierSystem> {
    let d: MultiplierDescriptor = read_json(path)?;
    Ok(d.build()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum SuiteName {
    Whittaker,
    Operators,
    Multiplier,
    Forms,
    Vvforms,
    All,
}

impl SuiteName {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Whittaker => "whittaker",
            SuiteName::Operators => "operators",
            SuiteName::Multiplier => "multiplier",
            SuiteName::Forms => "forms",
            SuiteName::Vvforms => "vvforms",
            SuiteName::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OperatorSuite {
    Factorization,
    Commutation,
    Basis,
}

/// Everything a verification run depends on.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub suite: SuiteName,
    pub operator_suite: Option<OperatorSuite>,
    pub kind: SubgroupKind,
    /// `None` means the suite's default set of levels.
    pub level: Option<u64>,
    pub multiplier: Option<PathBuf>,
    pub nu: Option<Complex64>,
    pub k: Option<Complex64>,
    pub radius: Option<f64>,
    pub h: f64,
    /// Overrides the tolerance of checks that are exact up to rounding.
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: usize,
    pub seed: u64,
    pub timings: bool,
    pub mutate_basis_rule: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suite: SuiteName::All,
            operator_suite: None,
            kind: SubgroupKind::Gamma0,
            level: None,
            multiplier: None,
            nu: None,
            k: None,
            radius: None,
            h: 1e-3,
            tol: None,
            out: None,
            format: Format::Csv,
            jobs: 1,
            seed: DEFAULT_SEED,
            timings: false,
            mutate_basis_rule: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("--tol must be positive, got {t}")));
            }
        }
        if !(self.h > 0.0 && self.h < 0.1) {
            return Err(CliError::Config(format!(
                "--h must lie in (0, 0.1), got {}",
                self.h
            )));
        }
        if self.jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        if let Some(r) = self.radius {
            if !(r >= 8.0 && r.is_finite()) {
                return Err(CliError::Config(format!("--R must be at least 8, got {r}")));
            }
        }
        if self.level == Some(0) {
            return Err(CliError::Config("--level must be at least 1".into()));
        }
        if let Some(p) = &self.multiplier {
            if !p.is_file() {
                return Err(CliError::Config(format!(
                    "multiplier file {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    /// The levels a suite runs on.
    pub fn levels(&self, default: &[u64]) -> Vec<u64> {
        self.level.map_or_else(|| default.to_vec(), |l| vec![l])
    }

    pub fn group(&self, level: u64) -> CliResult<CongruenceSubgroup> {
        Ok(CongruenceSubgroup::new(self.kind, level)?)
    }
}

/// Seed from `MAASSLAB_SEED`, falling back to 42.
pub fn seed_from_env() -> CliResult<u64> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_VAR}='{s}' is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
