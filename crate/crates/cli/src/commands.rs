//! The non-suite subcommands: small JSON or report-producing queries.

use std::path::Path;
use std::sync::Arc;

use maass_lab::forms::{
    eisenstein_truncated, verify_growth, verify_transformation, ExpansionSpec,
    FourierWhittakerExpansion, GeneralizedMaassForm, Seed, SeriesSpec,
};
use maass_lab::modgroup::{apply_moebius, parse_word, UHPoint};
use maass_lab::multiplier::MultiplierSystem;
use maass_lab::operators::{extrapolated, laplacian_fd};
use maass_lab::subgroup::{cusps, CongruenceSubgroup, CosetTable};
use maass_lab::vvforms::{induced_weight_matrix, lift_pi};
use maass_lab::whittaker::{normalized_m, normalized_w, whittaker_m, whittaker_w, WhittakerParams};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{load_multiplier, read_json, CliError, CliResult, RunConfig};
use crate::suites::vvforms::{lifted_delta, roundtrip_residuals, transformation_samples};
use crate::suites::{case_rng, max_of, random_point, Check};

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Serialize)]
struct CuspRecord {
    q: String,
    width: u64,
}

pub fn subgroup_info(group: CongruenceSubgroup) -> CliResult<Value> {
    let table = CosetTable::new(group)?;
    let cusps: Vec<CuspRecord> = cusps(&table)?
        .into_iter()
        .map(|c| CuspRecord {
            q: c.q.to_string(),
            width: c.width,
        })
        .collect();
    Ok(json!({ "group": group.to_string(), "index": table.index(), "cusps": cusps }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum WhittakerFunction {
    W,
    M,
}

pub fn whittaker_eval(
    k: Complex64,
    nu: Complex64,
    y: f64,
    normalized: bool,
    f: WhittakerFunction,
) -> CliResult<Value> {
    let p = WhittakerParams::new(k, nu);
    let r = match (f, normalized) {
        (WhittakerFunction::W, false) => whittaker_w(p, y)?,
        (WhittakerFunction::W, true) => normalized_w(p, y)?,
        (WhittakerFunction::M, false) => whittaker_m(p, y)?,
        (WhittakerFunction::M, true) => normalized_m(p, y)?,
    };
    Ok(json!({ "value": pair(r.value), "error": r.abs_error_estimate, "method": r.method }))
}

/// The configured group, defaulting to `level`.
fn group_of(cfg: &RunConfig, default_level: u64) -> CliResult<CongruenceSubgroup> {
    cfg.group(cfg.level.unwrap_or(default_level))
}

fn expansion_from(
    cfg: &RunConfig,
    spec: &Path,
    default_level: u64,
) -> CliResult<FourierWhittakerExpansion> {
    let spec: ExpansionSpec = read_json(spec)?;
    let table = CosetTable::new(group_of(cfg, default_level)?)?;
    Ok(spec.build(&table)?)
}

/// The multiplier from `--multiplier`, or the trivial one of the expansion's weight.
fn multiplier_for(
    cfg: &RunConfig,
    group: CongruenceSubgroup,
    k: Complex64,
) -> CliResult<Arc<MultiplierSystem>> {
    let v = match &cfg.multiplier {
        Some(path) => load_multiplier(path)?,
        None => MultiplierSystem::trivial_with_weight(group, k)?,
    };
    if v.group() != group {
        return Err(CliError::Config(format!(
            "the multiplier lives on {} but the command works on {group}",
            v.group()
        )));
    }
    Ok(Arc::new(v))
}

pub fn form_eval_expansion(
    cfg: &RunConfig,
    spec: &Path,
    z: UHPoint,
    terms: Option<u64>,
) -> CliResult<Value> {
    let e = expansion_from(cfg, spec, 1)?;
    let r = e.eval(z, terms)?;
    Ok(json!({
        "cusp": e.cusp.q.to_string(),
        "z": [z.x, z.y],
        "value": pair(r.value),
        "truncation_error": r.truncation_error,
        "eval_error": r.eval_error,
        "terms": r.terms,
    }))
}

pub fn form_eisenstein(cfg: &RunConfig, z: UHPoint) -> CliResult<Value> {
    let group = group_of(cfg, 1)?;
    let nu = cfg.nu.unwrap_or(Complex64::new(1.5, 0.0));
    let radius = cfg.radius.unwrap_or(100.0);
    let v = Arc::new(MultiplierSystem::trivial(group)?);
    let spec = SeriesSpec::new(Seed::Power { nu }, v, radius)?;
    let r = eisenstein_truncated(&spec, z)?;
    Ok(json!({
        "group": group.to_string(),
        "nu": pair(nu),
        "z": [z.x, z.y],
        "radius": r.radius,
        "value": pair(r.value),
        "tail_bound": r.tail_bound,
        "terms": r.terms,
        "alpha": spec.alpha,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FormCheck {
    Transformation,
    Growth,
    Eigen,
}

fn relative_eigen_residual(u: &GeneralizedMaassForm, z: UHPoint, h: f64) -> maass_lab::Result<f64> {
    let uz = u.eval(z)?;
    let lap = extrapolated(h, |s| laplacian_fd(&u.evaluator, u.weight, z, s))?;
    Ok((lap - u.eigenvalue() * uz).norm() / uz.norm().max(f64::MIN_POSITIVE))
}

/// Checks on the form described by an expansion spec.
pub fn form_verify(cfg: &RunConfig, which: FormCheck, spec: &Path) -> CliResult<Vec<Check>> {
    let e = expansion_from(cfg, spec, 1)?;
    let group = group_of(cfg, 1)?;
    let u = e.to_form(multiplier_for(cfg, group, e.k)?)?;
    let q = &e.cusp;
    let mut rng = case_rng(cfg.seed, "form/verify");
    let y_lo = e.y_min + 0.2;
    let check = match which {
        FormCheck::Transformation => {
            let l = q.width as f64;
            let samples: Vec<_> = (0..10)
                .map(|_| {
                    let w = random_point(&mut rng, (-l / 2.0, l / 2.0), (y_lo, y_lo + 1.5));
                    (q.stabilizer.clone(), apply_moebius(&q.scaling, w))
                })
                .collect();
            Check::exact("transformation", verify_transformation(&u, &samples)?, 1e-8)
                .inputs(format!("cusp {};stabilizer;samples=10", q.q))
        }
        FormCheck::Growth => {
            let grid: Vec<f64> = (0..50)
                .map(|i| y_lo + i as f64 * (25.0 - y_lo) / 49.0)
                .collect();
            let c = e.growth + 0.5;
            let ok = verify_growth(&u, q, c, &grid)?;
            Check::fixed("growth", if ok { 0.0 } else { 1.0 }, 0.0).inputs(format!(
                "cusp {};|u(g_q(iy))| e^(-{c} y) eventually decreasing;1 if not",
                q.q
            ))
        }
        FormCheck::Eigen => {
            let mut res = Vec::new();
            for _ in 0..4 {
                let w = random_point(&mut rng, (-0.5, 0.5), (y_lo, y_lo + 1.0));
                res.push(relative_eigen_residual(
                    &u,
                    apply_moebius(&q.scaling, w),
                    cfg.h,
                )?);
            }
            Check::fixed("eigen", max_of(res), 1e-6)
                .step(cfg.h)
                .inputs("4 points;relative;one Richardson step")
        }
    };
    Ok(vec![check.params(Some(e.k), Some(e.nu))])
}

pub fn vv_induce(cfg: &RunConfig, element: &str, z: UHPoint) -> CliResult<Value> {
    let group = match (&cfg.multiplier, cfg.level) {
        (Some(path), None) => load_multiplier(path)?.group(),
        _ => group_of(cfg, 2)?,
    };
    let v = multiplier_for(cfg, group, cfg.k.unwrap_or_default())?;
    let table = Arc::new(CosetTable::new(group)?);
    let w = induced_weight_matrix(Arc::clone(&v), Arc::clone(&table))?;
    let h = parse_word(element)?;
    let m = w.eval(&h, z)?;
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
        .collect();
    Ok(json!({
        "group": group.to_string(),
        "weight": pair(v.weight()),
        "element": h.to_string(),
        "z": [z.x, z.y],
        "dimension": m.nrows(),
        "matrix": rows,
    }))
}

/// Round trips through `Π` and `π` for the form in `spec`, or the lifted discriminant.
pub fn vv_roundtrip(cfg: &RunConfig, spec: Option<&Path>) -> CliResult<Vec<Check>> {
    let group = group_of(cfg, 2)?;
    let u = match spec {
        Some(path) => {
            let e = expansion_from(cfg, path, 2)?;
            e.to_form(multiplier_for(cfg, group, e.k)?)?
        }
        None => lifted_delta()?.restrict(group)?,
    };
    let table = Arc::new(CosetTable::new(group)?);
    let vu = lift_pi(&u, Arc::clone(&table))?;
    let mut rng = case_rng(cfg.seed, "vv/roundtrip");
    let (scalar, vector) = roundtrip_residuals(&u, &vu, &table, &mut rng, 50)?;
    let tr = vu.transformation_residual(&transformation_samples(&mut rng, 20))?;
    let (k, nu) = (Some(u.weight), Some(u.nu));
    Ok(vec![
        Check::exact("pi-Pi", scalar, 1e-12)
            .params(k, nu)
            .inputs("samples=50"),
        Check::exact("Pi-pi", vector, 1e-12)
            .params(k, nu)
            .inputs("samples=50"),
        Check::exact("transformation", tr, 1e-9)
            .params(k, nu)
            .inputs("samples=20"),
    ])
}
