//! Verification suites. Each suite is a list of independent cases; a case owns its random
//! stream (derived from the run seed and the case id) so results do not depend on scheduling.

use std::time::Instant;

use maass_lab::modgroup::{GroupElement, UHPoint};
use maass_lab::multiplier::MultiplierSystem;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{CliResult, RunConfig, SuiteName};
use crate::report::{passes, sort_rows, ReportRow};

pub mod forms;
pub mod multiplier;
pub mod operators;
pub mod vvforms;
pub mod whittaker;

/// How a tolerance reacts to `--tol`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TolClass {
    /// Identities that hold up to rounding; `--tol` replaces the default.
    Exact,
    /// Discretization, truncation or order checks; never overridden.
    Fixed,
}

/// A single measured quantity.
#[derive(Clone, Debug)]
pub struct Check {
    pub case: String,
    pub k: Option<Complex64>,
    pub nu: Option<Complex64>,
    pub h: Option<f64>,
    pub inputs: String,
    pub residual: f64,
    pub tolerance: f64,
    pub class: TolClass,
    pub ratio: Option<f64>,
}

impl Check {
    pub fn new(case: impl Into<String>, residual: f64, tolerance: f64, class: TolClass) -> Self {
        Check {
            case: case.into(),
            k: None,
            nu: None,
            h: None,
            inputs: String::new(),
            residual,
            tolerance,
            class,
            ratio: None,
        }
    }

    pub fn exact(case: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check::new(case, residual, tolerance, TolClass::Exact)
    }

    pub fn fixed(case: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check::new(case, residual, tolerance, TolClass::Fixed)
    }

    pub fn params(mut self, k: Option<Complex64>, nu: Option<Complex64>) -> Self {
        self.k = k;
        self.nu = nu;
        self
    }

    pub fn step(mut self, h: f64) -> Self {
        self.h = Some(h);
        self
    }

    pub fn inputs(mut self, inputs: impl Into<String>) -> Self {
        self.inputs = inputs.into();
        self
    }

    pub fn ratio(mut self, ratio: f64) -> Self {
        self.ratio = Some(ratio);
        self
    }
}

pub type CaseResult = maass_lab::Result<Vec<Check>>;
type CaseFn = Box<dyn Fn(&mut ChaCha8Rng) -> CaseResult + Send + Sync>;

/// A unit of work producing one or more checks.
pub struct Case {
    pub suite: &'static str,
    pub id: String,
    run: CaseFn,
}

impl Case {
    pub fn new<F>(suite: &'static str, id: impl Into<String>, run: F) -> Self
    where
        F: Fn(&mut ChaCha8Rng) -> CaseResult + Send + Sync + 'static,
    {
        Case {
            suite,
            id: id.into(),
            run: Box::new(run),
        }
    }
}

fn stream_of(id: &str) -> u64 {
    // FNV-1a: stable across platforms and releases
    id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn case_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_of(id));
    rng
}

pub fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

pub fn to_row(suite: &str, c: Check, cfg: &RunConfig, wall_ms: Option<f64>) -> ReportRow {
    let tolerance = match (c.class, cfg.tol) {
        (TolClass::Exact, Some(t)) => t,
        _ => c.tolerance,
    };
    ReportRow {
        suite: suite.to_string(),
        case: c.case,
        k: c.k.map(fmt_complex),
        nu: c.nu.map(fmt_complex),
        h: c.h,
        inputs: c.inputs,
        residual: c.residual,
        tolerance,
        richardson_ratio: c.ratio,
        pass: passes(c.residual, tolerance),
        wall_ms,
    }
}

fn run_case(case: &Case, cfg: &RunConfig) -> Vec<ReportRow> {
    let mut rng = case_rng(cfg.seed, &format!("{}/{}", case.suite, case.id));
    let start = Instant::now();
    let result = (case.run)(&mut rng);
    let wall = cfg.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
    match result {
        Ok(checks) => checks
            .into_iter()
            .map(|c| to_row(case.suite, c, cfg, wall))
            .collect(),
        Err(e) => {
            let failed = Check::fixed(case.id.clone(), f64::NAN, 0.0).inputs(format!("error: {e}"));
            vec![to_row(case.suite, failed, cfg, wall)]
        }
    }
}

/// Builds the cases of the requested suite(s). Problems with the configuration surface here,
/// before anything runs.
pub fn build_cases(cfg: &RunConfig) -> CliResult<Vec<Case>> {
    let mut cases = Vec::new();
    let want = |s: SuiteName| cfg.suite == SuiteName::All || cfg.suite == s;
    if want(SuiteName::Whittaker) {
        cases.extend(whittaker::cases(cfg)?);
    }
    if want(SuiteName::Operators) {
        cases.extend(operators::cases(cfg)?);
    }
    if want(SuiteName::Multiplier) {
        cases.extend(multiplier::cases(cfg)?);
    }
    if want(SuiteName::Forms) {
        cases.extend(forms::cases(cfg)?);
    }
    if want(SuiteName::Vvforms) {
        cases.extend(vvforms::cases(cfg)?);
    }
    Ok(cases)
}

/// Runs the suite on a pool of `cfg.jobs` workers; rows come back sorted by (suite, case).
pub fn run_suite(cfg: &RunConfig) -> CliResult<Vec<ReportRow>> {
    cfg.validate()?;
    let cases = build_cases(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| {
            crate::config::CliError::Config(format!("cannot start {} workers: {e}", cfg.jobs))
        })?;
    let mut rows: Vec<ReportRow> = pool.install(|| {
        cases
            .par_iter()
            .flat_map_iter(|c| run_case(c, cfg))
            .collect()
    });
    sort_rows(&mut rows);
    Ok(rows)
}

// ---------------------------------------------------------------------------------------
// sampling helpers shared by the suites

pub fn random_point(rng: &mut ChaCha8Rng, x: (f64, f64), y: (f64, f64)) -> UHPoint {
    UHPoint {
        x: rng.gen_range(x.0..x.1),
        y: rng.gen_range(y.0..y.1),
    }
}

/// Uniform in the disc `|z| ≤ r`.
pub fn random_in_disc(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if z.norm() <= r {
            return z;
        }
    }
}

/// A product of `1..=len` random Schreier generators of the multiplier's group (or inverses).
pub fn random_group_element(
    v: &MultiplierSystem,
    rng: &mut ChaCha8Rng,
    len: usize,
) -> GroupElement {
    let gens = v.presentation().generators();
    let mut g = GroupElement::identity();
    for _ in 0..rng.gen_range(1..=len) {
        let s = &gens[rng.gen_range(0..gens.len())];
        let s = if rng.gen_bool(0.5) {
            s.inverse()
        } else {
            s.clone()
        };
        g = &g * &s;
    }
    g
}

/// A random word of length `1..=len` in `S`, `T`, `T^{-1}`.
pub fn random_modular_element(rng: &mut ChaCha8Rng, len: usize) -> GroupElement {
    let letters = [
        GroupElement::s(),
        GroupElement::t(),
        GroupElement::t_pow(-1),
    ];
    let mut g = GroupElement::identity();
    for _ in 0..rng.gen_range(1..=len) {
        g = &g * &letters[rng.gen_range(0..3)];
    }
    g
}

pub fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so a failed measurement cannot pass
    values.into_iter().fold(0.0, |m: f64, x| {
        if x.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(x)
        }
    })
}
