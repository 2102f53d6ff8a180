use std::sync::Arc;

use maass_lab::modgroup::{apply_moebius, arg, GroupElement, UHPoint};
use maass_lab::multiplier::{check_unitary_extension, Multiplier, MultiplierSystem};
use maass_lab::subgroup::{CongruenceSubgroup, CosetTable, Presentation};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use super::{max_of, random_group_element, Case, Check};
use crate::config::{load_multiplier, CliResult, RunConfig};

const SUITE: &str = "multiplier";
const PAIRS: usize = 500;
const WORD_LEN: usize = 5;
const CONSISTENCY_TOL: f64 = 1e-9;
const Z_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
const EXPONENTIAL_S: f64 = 0.3;

/// The multipliers exercised on a group: trivial, restricted eta and (when `Γ` has a
/// homomorphism to ℤ) exponential.
pub fn standard_multipliers(
    group: CongruenceSubgroup,
) -> CliResult<Vec<(&'static str, Arc<MultiplierSystem>)>> {
    let mut out = vec![
        ("trivial", Arc::new(MultiplierSystem::trivial(group)?)),
        (
            "eta",
            Arc::new(MultiplierSystem::eta(CongruenceSubgroup::full())?.restrict(group)?),
        ),
    ];
    let pres = Presentation::new(&CosetTable::new(group)?);
    if let Some(phi) = pres.integer_homomorphisms().into_iter().next() {
        let v = MultiplierSystem::exponential(group, phi, Complex64::new(EXPONENTIAL_S, 0.0))?;
        out.push(("exponential", Arc::new(v)));
    }
    Ok(out)
}

fn arg_sum(g: &GroupElement, h: &GroupElement, z: UHPoint) -> f64 {
    let gh = g * h;
    arg(g.denominator_at(apply_moebius(h, z))) + arg(h.denominator_at(z))
        - arg(gh.denominator_at(z))
}

/// `ω(g, h)` at three points; returns the value at `2i` and the spread.
fn omega_spread(g: &GroupElement, h: &GroupElement, k: Complex64) -> (Complex64, f64) {
    let pts = [
        UHPoint { x: 0.0, y: 2.0 },
        UHPoint { x: 1.0, y: 1.0 },
        UHPoint { x: -0.3, y: 0.7 },
    ];
    let w: Vec<Complex64> = pts
        .iter()
        .map(|&z| (Complex64::i() * k * arg_sum(g, h, z)).exp())
        .collect();
    let spread = max_of(w.iter().map(|x| (x - w[0]).norm()));
    (w[0], spread)
}

/// Largest relative defect of `v(gh) = v(g)v(h)ω(g, h)` and the largest z-spread of `ω`.
pub fn consistency(
    v: &MultiplierSystem,
    rng: &mut ChaCha8Rng,
    pairs: usize,
) -> maass_lab::Result<(f64, f64)> {
    let mut rel = Vec::with_capacity(pairs);
    let mut spread = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let g = random_group_element(v, rng, WORD_LEN);
        let h = random_group_element(v, rng, WORD_LEN);
        let (w, s) = omega_spread(&g, &h, v.weight());
        let lhs = v.evaluate(&(&g * &h))?;
        let rhs = v.evaluate(&g)? * v.evaluate(&h)? * w;
        rel.push((lhs - rhs).norm() / lhs.norm());
        spread.push(s);
    }
    Ok((max_of(rel), max_of(spread)))
}

fn consistency_case(name: String, v: Arc<MultiplierSystem>) -> Case {
    Case::new(SUITE, format!("consistency/{name}"), move |rng| {
        let (rel, spread) = consistency(&v, rng, PAIRS)?;
        let inputs = format!("pairs={PAIRS};words of <= {WORD_LEN} generators");
        Ok(vec![
            Check::exact(format!("consistency/{name}"), rel, CONSISTENCY_TOL)
                .params(Some(v.weight()), None)
                .inputs(inputs.clone()),
            Check::exact(format!("z-independence/{name}"), spread, Z_TOL)
                .params(Some(v.weight()), None)
                .inputs(format!("{inputs};z in 2i,1+i,-0.3+0.7i")),
        ])
    })
}

/// Equal to `2^n` on the powers `r^n` that leave `sub` and 1 elsewhere; unitary on `sub`.
pub struct Synthetic {
    pub sub: CongruenceSubgroup,
    pub powers: Vec<GroupElement>,
}

impl Multiplier for Synthetic {
    fn weight(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn value(&self, g: &GroupElement) -> maass_lab::Result<Complex64> {
        Ok(match self.powers.iter().position(|p| p == g) {
            Some(i) if !self.sub.contains(g) => Complex64::new(2f64.powi(i as i32 + 1), 0.0),
            _ => Complex64::new(1.0, 0.0),
        })
    }
}

/// `max_n |log₂|v(rⁿ)| - n|` over the powers outside `Γ0(4)`, with `r` the non-trivial
/// representative of `Γ0(4)` in `Γ0(2)`; infinite when the check wrongly reports unitarity.
pub fn synthetic_growth_defect() -> maass_lab::Result<f64> {
    let (sup, sub) = (CongruenceSubgroup::gamma0(2), CongruenceSubgroup::gamma0(4));
    let table = CosetTable::new(sub)?;
    let r = table
        .reps()
        .iter()
        .find(|r| sup.contains(r) && !r.is_identity())
        .cloned()
        .ok_or_else(|| maass_lab::Error::Internal("no representative of Γ0(4) in Γ0(2)".into()))?;
    let v = Synthetic {
        sub,
        powers: (1..=10).map(|n| r.pow(n)).collect(),
    };
    let report = check_unitary_extension(&v, sup, sub)?;
    if report.unitary {
        return Ok(f64::INFINITY);
    }
    let row = report
        .reps
        .iter()
        .find(|x| x.powers.is_some())
        .ok_or_else(|| maass_lab::Error::Internal("no growth reported".into()))?;
    let powers = row.powers.as_deref().unwrap_or_default();
    Ok(max_of(
        powers
            .iter()
            .enumerate()
            .filter(|(i, _)| !sub.contains(&r.pow(*i as i64 + 1)))
            .map(|(i, m)| (m.log2() - (i + 1) as f64).abs()),
    ))
}

pub fn cases(cfg: &RunConfig) -> CliResult<Vec<Case>> {
    let mut out = Vec::new();
    for level in cfg.levels(&[2, 4]) {
        let group = cfg.group(level)?;
        for (name, v) in standard_multipliers(group)? {
            out.push(consistency_case(format!("{name}/{group}"), v));
        }
    }
    if let Some(path) = &cfg.multiplier {
        let v = Arc::new(load_multiplier(path)?);
        out.push(consistency_case(format!("file/{}", v.group()), v));
    }
    out.push(Case::new(SUITE, "unitary-extension/eta", |_| {
        let eta = MultiplierSystem::eta(CongruenceSubgroup::full())?;
        let report = check_unitary_extension(
            &eta,
            CongruenceSubgroup::full(),
            CongruenceSubgroup::gamma0(2),
        )?;
        let defect = max_of(report.reps.iter().map(|r| (r.modulus - 1.0).abs()));
        let defect = if report.unitary {
            defect
        } else {
            f64::INFINITY
        };
        Ok(vec![Check::exact(
            "unitary-extension/eta",
            defect,
            UNITARY_TOL,
        )
        .inputs("eta on SL2(Z) over Gamma0(2);max ||v(r)|-1|")])
    }));
    out.push(Case::new(SUITE, "unitary-extension/synthetic", |_| {
        Ok(vec![Check::fixed(
            "unitary-extension/synthetic",
            synthetic_growth_defect()?,
            1.0,
        )
        .inputs(
            "|v(r)|=2 on Gamma0(2) over Gamma0(4);max |log2|v(r^n)|-n| for r^n outside, n<=10",
        )])
    }));
    Ok(out)
}
