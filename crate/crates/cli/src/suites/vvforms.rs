use std::sync::Arc;

use maass_lab::forms::{lift_holomorphic, GeneralizedMaassForm, QExpansion};
use maass_lab::modgroup::{apply_moebius, GroupElement, UHPoint};
use maass_lab::multiplier::MultiplierSystem;
use maass_lab::subgroup::{CongruenceSubgroup, CosetTable};
use maass_lab::vvforms::{
    induced_weight_matrix, is_monomial, lift_pi, project_pi, right_regular_chi0, VectorValuedForm,
    WeightMatrix,
};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use super::multiplier::standard_multipliers;
use super::{max_of, random_modular_element, random_point, Case, Check};
use crate::config::{load_multiplier, CliResult, RunConfig};

const SUITE: &str = "vvforms";
const COCYCLE_SAMPLES: usize = 200;
const COCYCLE_TOL: f64 = 1e-10;
const MATRIX_SAMPLES: usize = 20;
const ROUNDTRIP_SAMPLES: usize = 50;
const ROUNDTRIP_TOL: f64 = 1e-12;
const TRANSFORMATION_TOL: f64 = 1e-9;
const EIGEN_TOL: f64 = 1e-6;
const WORD_LEN: usize = 6;

/// `|w(gh, z) - w(g, hz) w(h, z)|_max / max(1, |w(gh, z)|_max)`
pub fn cocycle_defect(
    w: &WeightMatrix,
    g: &GroupElement,
    h: &GroupElement,
    z: UHPoint,
) -> maass_lab::Result<f64> {
    let lhs = w.eval(&(g * h), z)?;
    let rhs = w.eval(g, apply_moebius(h, z))? * w.eval(h, z)?;
    let scale = lhs.iter().map(|x| x.norm()).fold(1.0, f64::max);
    Ok((lhs - rhs).iter().map(|x| x.norm()).fold(0.0, f64::max) / scale)
}

fn cocycle_case(name: String, v: Arc<MultiplierSystem>) -> Case {
    let id = format!("cocycle/{name}");
    Case::new(SUITE, id.clone(), move |rng| {
        let table = Arc::new(CosetTable::new(v.group())?);
        let w = induced_weight_matrix(Arc::clone(&v), table)?;
        let mut worst = Vec::with_capacity(COCYCLE_SAMPLES);
        for _ in 0..COCYCLE_SAMPLES {
            let g = random_modular_element(rng, WORD_LEN);
            let h = random_modular_element(rng, WORD_LEN);
            let z = random_point(rng, (-1.0, 1.0), (0.3, 2.0));
            worst.push(cocycle_defect(&w, &g, &h, z)?);
        }
        let monomial = (0..MATRIX_SAMPLES)
            .map(|_| {
                let h = random_modular_element(rng, WORD_LEN);
                let z = random_point(rng, (-1.0, 1.0), (0.3, 2.0));
                w.eval(&h, z).map(|m| is_monomial(&m))
            })
            .collect::<maass_lab::Result<Vec<bool>>>()?;
        let not_monomial = monomial.iter().filter(|&&m| !m).count() as f64;
        Ok(vec![
            Check::exact(id.clone(), max_of(worst), COCYCLE_TOL)
                .params(Some(v.weight()), None)
                .inputs(format!(
                    "samples={COCYCLE_SAMPLES};words of <= {WORD_LEN} letters in S,T,T^-1"
                )),
            Check::fixed(format!("monomial/{name}"), not_monomial, 0.0)
                .params(Some(v.weight()), None)
                .inputs(format!(
                    "samples={MATRIX_SAMPLES};count of matrices that are not monomial"
                )),
        ])
    })
}

fn chi0_case(group: CongruenceSubgroup) -> Case {
    let id = format!("chi0/{group}");
    Case::new(SUITE, id.clone(), move |rng| {
        let table = Arc::new(CosetTable::new(group)?);
        let v = Arc::new(MultiplierSystem::trivial(group)?);
        let w = induced_weight_matrix(v, Arc::clone(&table))?;
        let mut worst = Vec::with_capacity(MATRIX_SAMPLES);
        for _ in 0..MATRIX_SAMPLES {
            let h = random_modular_element(rng, WORD_LEN);
            let z = random_point(rng, (-1.0, 1.0), (0.3, 2.0));
            let diff = w.eval(&h, z)? - right_regular_chi0(&table, &h)?;
            worst.push(diff.iter().map(|x| x.norm()).fold(0.0, f64::max));
        }
        Ok(vec![Check::fixed(id.clone(), max_of(worst), 0.0).inputs(
            format!(
                "samples={MATRIX_SAMPLES};trivial data must give the permutation matrix exactly"
            ),
        )])
    })
}

pub fn lifted_delta() -> maass_lab::Result<GeneralizedMaassForm> {
    let v = MultiplierSystem::trivial_with_weight(
        CongruenceSubgroup::full(),
        Complex64::new(12.0, 0.0),
    )?;
    lift_holomorphic(
        QExpansion::discriminant(80),
        Complex64::new(12.0, 0.0),
        Arc::new(v),
    )
}

/// `(h, z)` with `h` a random word and both `z`, `hz` comfortably inside ℍ.
pub fn transformation_samples(rng: &mut ChaCha8Rng, n: usize) -> Vec<(GroupElement, UHPoint)> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let h = random_modular_element(rng, 4);
        let z = random_point(rng, (-0.5, 0.5), (0.7, 1.5));
        if apply_moebius(&h, z).y >= 0.3 {
            out.push((h, z));
        }
    }
    out
}

/// Largest relative differences for `π(Π u) = u` and `Π(π ū) = ū` on `n` points.
pub fn roundtrip_residuals(
    u: &GeneralizedMaassForm,
    vu: &VectorValuedForm,
    table: &Arc<CosetTable>,
    rng: &mut ChaCha8Rng,
    n: usize,
) -> maass_lab::Result<(f64, f64)> {
    let back = project_pi(vu, Arc::clone(&u.multiplier), table)?;
    let again = lift_pi(&back, Arc::clone(table))?;
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(f64::MIN_POSITIVE);
    let mut scalar = Vec::with_capacity(n);
    let mut vector = Vec::with_capacity(n);
    for _ in 0..n {
        let z = random_point(rng, (-0.5, 0.5), (0.6, 2.0));
        scalar.push(rel(u.eval(z)?, back.eval(z)?));
        let (a, b) = (vu.eval(z)?, again.eval(z)?);
        vector.push(max_of(a.iter().zip(&b).map(|(x, y)| rel(*x, *y))));
    }
    Ok((max_of(scalar), max_of(vector)))
}

fn roundtrip_case(group: CongruenceSubgroup, h: f64) -> Case {
    let id = format!("roundtrip/delta/{group}");
    Case::new(SUITE, id.clone(), move |rng| {
        let table = Arc::new(CosetTable::new(group)?);
        let u = lifted_delta()?.restrict(group)?;
        let vu = lift_pi(&u, Arc::clone(&table))?;
        let (scalar, vector) = roundtrip_residuals(&u, &vu, &table, rng, ROUNDTRIP_SAMPLES)?;
        let samples = transformation_samples(rng, MATRIX_SAMPLES);
        let tr = vu.transformation_residual(&samples)?;
        let eigen = max_of(
            [UHPoint { x: 0.1, y: 1.0 }, UHPoint { x: -0.3, y: 1.4 }]
                .into_iter()
                .map(|z| vu.eigen_residual(z, h).unwrap_or(f64::NAN)),
        );
        let k = Some(u.weight);
        let nu = Some(u.nu);
        let inputs = format!("samples={ROUNDTRIP_SAMPLES};dimension {}", vu.dimension());
        Ok(vec![
            Check::exact(format!("{id}/pi-Pi"), scalar, ROUNDTRIP_TOL)
                .params(k, nu)
                .inputs(inputs.clone()),
            Check::exact(format!("{id}/Pi-pi"), vector, ROUNDTRIP_TOL)
                .params(k, nu)
                .inputs(inputs),
            Check::exact(format!("{id}/transformation"), tr, TRANSFORMATION_TOL)
                .params(k, nu)
                .inputs(format!("samples={MATRIX_SAMPLES};relative to 1+|u|")),
            Check::fixed(format!("{id}/eigen"), eigen, EIGEN_TOL)
                .params(k, nu)
                .step(h)
                .inputs("two points;relative to 1+|u_i|;one Richardson step"),
        ])
    })
}

pub fn cases(cfg: &RunConfig) -> CliResult<Vec<Case>> {
    let mut out = Vec::new();
    let levels = cfg.levels(&[2, 4]);
    for &level in &levels {
        let group = cfg.group(level)?;
        for (name, v) in standard_multipliers(group)? {
            out.push(cocycle_case(format!("{name}/{group}"), v));
        }
        out.push(chi0_case(group));
    }
    if let Some(path) = &cfg.multiplier {
        let v = Arc::new(load_multiplier(path)?);
        out.push(cocycle_case(format!("file/{}", v.group()), v));
    }
    let group = cfg.group(cfg.level.unwrap_or(2))?;
    out.push(roundtrip_case(group, cfg.h));
    Ok(out)
}
