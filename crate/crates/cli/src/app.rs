//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use maass_lab::modgroup::UHPoint;
use maass_lab::subgroup::SubgroupKind;
use num_complex::Complex64;
use serde_json::Value;

use crate::commands::{self, FormCheck, WhittakerFunction};
use crate::config::{
    parse_complex, parse_kind, parse_point, seed_from_env, CliError, CliResult, Format,
    OperatorSuite, RunConfig, SuiteName,
};
use crate::report::{write_report, ReportRow};
use crate::suites::{run_suite, to_row, Check};

#[derive(Parser, Debug)]
#[command(
    name = "maass-lab",
    version,
    about = "Numerical checks for generalized Maass forms"
)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Subgroup family: gamma0, gamma1 or gamma
    #[arg(long, global = true, value_parser = parse_kind, default_value = "gamma0")]
    kind: SubgroupKind,
    #[arg(long, global = true)]
    level: Option<u64>,
    /// Multiplier descriptor (JSON)
    #[arg(long, global = true)]
    multiplier: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    nu: Option<Complex64>,
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    k: Option<Complex64>,
    /// Truncation radius of Poincaré-type sums
    #[arg(long = "R", global = true, allow_hyphen_values = true)]
    radius: Option<f64>,
    /// Finite-difference step
    #[arg(
        long,
        global = true,
        default_value_t = 1e-3,
        allow_hyphen_values = true
    )]
    h: f64,
    /// Tolerance for the checks that hold up to rounding
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Fill the wall_ms column (makes reports run-dependent)
    #[arg(long, global = true)]
    timings: bool,
    /// Deliberately break one closed-form rule, to see the harness catch it
    #[arg(long, global = true, hide = true)]
    mutate_basis_rule: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Subgroup data
    Subgroup {
        #[command(subcommand)]
        cmd: SubgroupCmd,
    },
    /// Normalized Whittaker functions
    Whittaker {
        #[command(subcommand)]
        cmd: WhittakerCmd,
    },
    /// Run a verification suite and write the report
    Verify {
        #[arg(value_enum)]
        target: SuiteName,
        /// Restrict `verify operators` to one family of checks
        #[arg(long, value_enum)]
        suite: Option<OperatorSuite>,
    },
    /// Scalar forms
    Form {
        #[command(subcommand)]
        cmd: FormCmd,
    },
    /// Vector-valued forms
    Vv {
        #[command(subcommand)]
        cmd: VvCmd,
    },
}

#[derive(Subcommand, Debug)]
enum SubgroupCmd {
    /// Index and cusps
    Info,
}

#[derive(Subcommand, Debug)]
enum WhittakerCmd {
    Eval {
        #[arg(long)]
        y: f64,
        #[arg(long)]
        normalized: bool,
        #[arg(long, value_enum, default_value = "w")]
        function: WhittakerFunction,
    },
}

#[derive(Subcommand, Debug)]
enum FormCmd {
    /// Evaluate a Fourier-Whittaker expansion
    EvalExpansion {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: UHPoint,
        /// Use at most this many terms per side
        #[arg(long)]
        terms: Option<u64>,
    },
    /// Truncated Eisenstein series
    Eisenstein {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: UHPoint,
    },
    /// Check one defining property of the form given by an expansion
    Verify {
        #[arg(long, value_enum)]
        which: FormCheck,
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum VvCmd {
    /// The induced weight matrix at one element
    Induce {
        #[arg(long)]
        element: String,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: UHPoint,
    },
    /// Lift to a vector-valued form and project back
    Roundtrip {
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

impl GlobalArgs {
    fn to_config(&self, seed: u64) -> RunConfig {
        RunConfig {
            suite: SuiteName::All,
            operator_suite: None,
            kind: self.kind,
            level: self.level,
            multiplier: self.multiplier.clone(),
            nu: self.nu,
            k: self.k,
            radius: self.radius,
            h: self.h,
            tol: self.tol,
            out: self.out.clone(),
            format: self.format,
            jobs: self.jobs,
            seed,
            timings: self.timings,
            mutate_basis_rule: self.mutate_basis_rule,
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T, W>(args: I, stdout: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch<W: Write>(cli: Cli, stdout: &mut W) -> CliResult<i32> {
    let mut cfg = cli.global.to_config(seed_from_env()?);
    cfg.validate()?;
    let requested_format = cli.global.format;
    match cli.command {
        Command::Subgroup {
            cmd: SubgroupCmd::Info,
        } => {
            let group = cfg.group(cfg.level.unwrap_or(1))?;
            emit_value(&cfg, &commands::subgroup_info(group)?, stdout, Format::Json)
        }
        Command::Whittaker {
            cmd:
                WhittakerCmd::Eval {
                    y,
                    normalized,
                    function,
                },
        } => {
            let (k, nu) = match (cfg.k, cfg.nu) {
                (Some(k), Some(nu)) => (k, nu),
                _ => return Err(CliError::Config("whittaker eval needs --k and --nu".into())),
            };
            let v = commands::whittaker_eval(k, nu, y, normalized, function)?;
            emit_value(&cfg, &v, stdout, Format::Json)
        }
        Command::Verify { target, suite } => {
            if suite.is_some() && target != SuiteName::Operators {
                return Err(CliError::Config(
                    "--suite only applies to `verify operators`".into(),
                ));
            }
            cfg.suite = target;
            cfg.operator_suite = suite;
            let rows = run_suite(&cfg)?;
            emit_report(&cfg, &rows, stdout)
        }
        Command::Form { cmd } => match cmd {
            FormCmd::EvalExpansion { spec, z, terms } => {
                let v = commands::form_eval_expansion(&cfg, &spec, z, terms)?;
                emit_value(&cfg, &v, stdout, requested_format)
            }
            FormCmd::Eisenstein { z } => {
                let v = commands::form_eisenstein(&cfg, z)?;
                emit_value(&cfg, &v, stdout, requested_format)
            }
            FormCmd::Verify { which, spec } => {
                let checks = commands::form_verify(&cfg, which, &spec)?;
                emit_report(&cfg, &rows_of("form", checks, &cfg), stdout)
            }
        },
        Command::Vv { cmd } => match cmd {
            VvCmd::Induce { element, z } => {
                let v = commands::vv_induce(&cfg, &element, z)?;
                emit_value(&cfg, &v, stdout, Format::Json)
            }
            VvCmd::Roundtrip { spec } => {
                let checks = commands::vv_roundtrip(&cfg, spec.as_deref())?;
                emit_report(&cfg, &rows_of("vv", checks, &cfg), stdout)
            }
        },
    }
}

fn rows_of(suite: &str, checks: Vec<Check>, cfg: &RunConfig) -> Vec<ReportRow> {
    checks
        .into_iter()
        .map(|c| to_row(suite, c, cfg, None))
        .collect()
}

/// Opens `--out` or falls back to stdout.
fn with_output<W: Write>(
    cfg: &RunConfig,
    stdout: &mut W,
    f: impl FnOnce(&mut dyn Write) -> CliResult<()>,
) -> CliResult<()> {
    match &cfg.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn emit_report<W: Write>(cfg: &RunConfig, rows: &[ReportRow], stdout: &mut W) -> CliResult<i32> {
    with_output(cfg, stdout, |w| write_report(rows, cfg.format, w))?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        eprintln!(
            "FAIL {}/{}: residual {:e} > tolerance {:e}",
            r.suite, r.case, r.residual, r.tolerance
        );
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

/// JSON always works; `csv` gives a one-row table of the scalar fields.
fn emit_value<W: Write>(
    cfg: &RunConfig,
    v: &Value,
    stdout: &mut W,
    format: Format,
) -> CliResult<i32> {
    with_output(cfg, stdout, |w| match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, v)
                .map_err(|e| CliError::Config(e.to_string()))?;
            writeln!(w)?;
            Ok(())
        }
        Format::Csv => {
            let (head, row) = flatten(v);
            let mut out = csv::Writer::from_writer(w);
            out.write_record(&head)?;
            out.write_record(&row)?;
            out.flush()?;
            Ok(())
        }
    })?;
    Ok(0)
}

/// Top-level fields; `[re, im]` pairs become two columns, anything nested stays JSON.
fn flatten(v: &Value) -> (Vec<String>, Vec<String>) {
    let mut head = Vec::new();
    let mut row = Vec::new();
    let Some(map) = v.as_object() else {
        return (vec!["value".into()], vec![v.to_string()]);
    };
    for (key, val) in map {
        match val.as_array().map(|a| a.as_slice()) {
            Some([re, im]) if re.is_number() && im.is_number() => {
                head.push(format!("{key}_re"));
                row.push(re.to_string());
                head.push(format!("{key}_im"));
                row.push(im.to_string());
            }
            _ => {
                head.push(key.clone());
                row.push(match val {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                });
            }
        }
    }
    (head, row)
}
