use std::f64::consts::PI;

use maass_lab::modgroup::{GroupElement, UHPoint};
use maass_lab::operators::{
    maass_fd, maass_on_basis_with, verify_factorization, verify_slash_commutation, BasisTerm,
    Direction, Family, SmoothEvaluator,
};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{max_of, random_point, Case, Check};
use crate::config::{CliResult, OperatorSuite, RunConfig};

const SUITE: &str = "operators";
const BASIS_DRAWS: usize = 20;
const BASIS_TOL: f64 = 1e-6;
const RATIO_TOL: f64 = 0.5;
/// Range of the natural argument `2π|n|y` of the basis terms.
const ARG_RANGE: (f64, f64) = (0.3, 1.5);
const SAMPLES: usize = 20;
/// Below this the differences are rounding noise and carry no order information.
const ROUNDING_FLOOR: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Wtilde => "W",
        Family::Mtilde => "M",
    }
}

fn dir_name(d: Direction) -> &'static str {
    match d {
        Direction::Up => "up",
        Direction::Down => "down",
    }
}

/// Draws the parameters for one rule: frequency of the given sign, `ν`, `k` and a point whose
/// height puts `2π|n|y` in `ARG_RANGE`.
fn basis_draw(
    rng: &mut ChaCha8Rng,
    family: Family,
    positive: bool,
) -> maass_lab::Result<(BasisTerm, UHPoint)> {
    let m = rng.gen_range(0.5..2.0);
    let n = if positive { m } else { -m };
    let nu = c(rng.gen_range(-0.45..0.45), rng.gen_range(-1.0..1.0));
    let k = c(rng.gen_range(-1.5..1.5), rng.gen_range(-0.5..0.5));
    let t = BasisTerm::new(n, 1.0, nu, k, family)?;
    let y = rng.gen_range(ARG_RANGE.0..ARG_RANGE.1) / (2.0 * PI * m);
    Ok((
        t,
        UHPoint {
            x: rng.gen_range(-0.5..0.5),
            y,
        },
    ))
}

struct RuleResult {
    residual: f64,
    ratio: f64,
}

/// FD against the closed rule, scaled by the size of the terms making up `E±`, plus the
/// self-convergence ratio `|L(h) - L(h/2)| / |L(h/2) - L(h/4)|` of the difference quotient.
fn basis_rule(
    t: &BasisTerm,
    p: UHPoint,
    dir: Direction,
    h: f64,
    mutate: bool,
) -> maass_lab::Result<RuleResult> {
    let (target, factor) = maass_on_basis_with(t, dir, mutate)?;
    let exact = factor * target.eval(p)?;
    let u = t.evaluator();
    let scale = t.eval(p)?.norm() * (1.0 + t.k.norm() + t.scale() * p.y);
    let l1 = maass_fd(dir, &u, t.k, p, h)?;
    let l2 = maass_fd(dir, &u, t.k, p, h / 2.0)?;
    let l4 = maass_fd(dir, &u, t.k, p, h / 4.0)?;
    Ok(RuleResult {
        residual: (l1 - exact).norm() / scale,
        ratio: (l1 - l2).norm() / (l2 - l4).norm(),
    })
}

fn basis_cases(cfg: &RunConfig) -> Vec<Case> {
    let mut out = Vec::new();
    let h = cfg.h;
    let mutate = cfg.mutate_basis_rule;
    for family in [Family::Wtilde, Family::Mtilde] {
        for positive in [true, false] {
            for dir in [Direction::Up, Direction::Down] {
                let id = format!(
                    "basis/{}/n{}/{}",
                    family_name(family),
                    if positive { ">0" } else { "<0" },
                    dir_name(dir)
                );
                out.push(Case::new(SUITE, id.clone(), move |rng| {
                    let mut residuals = Vec::new();
                    let mut ratios = Vec::new();
                    for _ in 0..BASIS_DRAWS {
                        let (t, p) = basis_draw(rng, family, positive)?;
                        let r = basis_rule(&t, p, dir, h, mutate)?;
                        residuals.push(r.residual);
                        ratios.push(r.ratio);
                    }
                    let worst_ratio = ratios
                        .iter()
                        .copied()
                        .max_by(|a, b| (a - 4.0).abs().total_cmp(&(b - 4.0).abs()))
                        .unwrap_or(f64::NAN);
                    let inputs = format!("draws={BASIS_DRAWS};|n| in [0.5,2];2pi|n|y in [0.3,1.5]");
                    Ok(vec![
                        Check::fixed(id.clone(), max_of(residuals), BASIS_TOL)
                            .step(h)
                            .ratio(worst_ratio)
                            .inputs(inputs.clone()),
                        Check::fixed(format!("{id}/order"), (worst_ratio - 4.0).abs(), RATIO_TOL)
                            .step(h)
                            .ratio(worst_ratio)
                            .inputs(format!("{inputs};|ratio-4|")),
                    ])
                }));
            }
        }
    }
    out
}

/// The three test functions and their weights.
fn families(cfg: &RunConfig) -> Vec<(&'static str, SmoothEvaluator, Complex64, Option<Complex64>)> {
    let s = c(0.87, 0.0);
    let power = SmoothEvaluator::new(move |z: UHPoint| Ok(c(z.y, 0.0).powc(s)));
    let lifted = SmoothEvaluator::new(|z: UHPoint| {
        Ok(z.y * (2.0 * PI * Complex64::i() * z.to_complex()).exp())
    });
    let nu = cfg.nu.unwrap_or(c(0.3, 0.2));
    let k = cfg.k.unwrap_or(c(0.5, 0.0));
    let term = BasisTerm::new(1.0, 1.0, nu, k, Family::Wtilde).map(|t| t.evaluator());
    let mut out = vec![
        ("power", power, c(0.0, 0.0), None),
        ("lifted-q", lifted, c(2.0, 0.0), None),
    ];
    if let Ok(term) = term {
        out.push(("W-term", term, k, Some(nu)));
    }
    out
}

fn samples(rng: &mut ChaCha8Rng) -> Vec<UHPoint> {
    (0..SAMPLES)
        .map(|_| random_point(rng, (-0.5, 0.5), (0.8, 2.0)))
        .collect()
}

/// Residual at `h` against `C·h²`, with `C` and the halving ratio taken from steps `4h`
/// and `2h`, where truncation still dominates rounding.
fn order_checks<F>(
    id: &str,
    k: Complex64,
    nu: Option<Complex64>,
    h: f64,
    residual: F,
) -> maass_lab::Result<Vec<Check>>
where
    F: Fn(f64) -> maass_lab::Result<f64>,
{
    let coarse = residual(4.0 * h)?;
    let mid = residual(2.0 * h)?;
    let r = residual(h)?;
    let ratio = coarse / mid;
    let predicted = 2.0 * mid / 4.0 + ROUNDING_FLOOR;
    let order_residual = if mid <= ROUNDING_FLOOR {
        0.0
    } else {
        (ratio - 4.0).abs()
    };
    Ok(vec![
        Check::fixed(id.to_string(), r, predicted)
            .params(Some(k), nu)
            .step(h)
            .ratio(ratio)
            .inputs(format!(
                "samples={SAMPLES};tolerance=2C*h^2 with C from step 2h"
            )),
        Check::fixed(format!("{id}/order"), order_residual, RATIO_TOL)
            .params(Some(k), nu)
            .step(h)
            .ratio(ratio)
            .inputs("|ratio-4| for steps 4h/2h, 0 at the rounding floor"),
    ])
}

fn factorization_cases(cfg: &RunConfig) -> Vec<Case> {
    let h = cfg.h;
    families(cfg)
        .into_iter()
        .map(|(name, u, k, nu)| {
            let id = format!("factorization/{name}");
            Case::new(SUITE, id.clone(), move |rng| {
                let pts = samples(rng);
                order_checks(&id, k, nu, h, |s| {
                    let (a, b) = verify_factorization(&u, k, &pts, s)?;
                    Ok(a.max(b))
                })
            })
        })
        .collect()
}

fn commutation_cases(cfg: &RunConfig) -> Vec<Case> {
    let h = cfg.h;
    let mut out = Vec::new();
    for (name, u, k, nu) in families(cfg) {
        for (gname, g) in [("S", GroupElement::s()), ("T", GroupElement::t())] {
            let id = format!("commutation/{name}/{gname}");
            let u = u.clone();
            out.push(Case::new(SUITE, id.clone(), move |rng| {
                let pts = samples(rng);
                order_checks(&id, k, nu, h, |s| {
                    let r = verify_slash_commutation(&u, k, &g, &pts, s)?;
                    Ok(r.laplacian.max(r.up).max(r.down))
                })
            }));
        }
    }
    out
}

pub fn cases(cfg: &RunConfig) -> CliResult<Vec<Case>> {
    let want = |s: OperatorSuite| cfg.operator_suite.is_none_or(|x| x == s);
    let mut out = Vec::new();
    if want(OperatorSuite::Basis) {
        out.extend(basis_cases(cfg));
    }
    if want(OperatorSuite::Factorization) {
        out.extend(factorization_cases(cfg));
    }
    if want(OperatorSuite::Commutation) {
        out.extend(commutation_cases(cfg));
    }
    Ok(out)
}
