use std::sync::Arc;

use maass_lab::forms::{
    lift_holomorphic, verify_transformation, FourierWhittakerExpansion, GeneralizedMaassForm,
    QExpansion, Seed, SeriesSpec,
};
use maass_lab::modgroup::{apply_moebius, parse_word, GroupElement, UHPoint};
use maass_lab::multiplier::MultiplierSystem;
use maass_lab::operators::{extrapolated, laplacian_fd, maass_fd, Direction};
use maass_lab::subgroup::{cusps, CongruenceSubgroup, CosetTable, SubgroupKind};
use num_complex::Complex64;
use num_integer::Integer;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{max_of, random_point, Case, Check};
use crate::config::{CliError, CliResult, RunConfig};

const SUITE: &str = "forms";
const LIFT_SAMPLES: usize = 10;
const TRANSFORMATION_TOL: f64 = 1e-9;
const EIGEN_TOL: f64 = 1e-6;
const SLOPE_TOL: f64 = 0.2;
const PERIODICITY_TOL: f64 = 1e-8;
const DEFAULT_NU: f64 = 1.5;
const DEFAULT_RADIUS: f64 = 200.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(γ, z)` with `γ` a short word in `S, T` and `Im γz ≥ 1/4`.
pub fn modular_samples(rng: &mut ChaCha8Rng, n: usize) -> Vec<(GroupElement, UHPoint)> {
    let words = ["S", "T", "TS", "ST", "T^-1 S", "S T^2", "STS", "T^2 S T"];
    let mut out = Vec::new();
    while out.len() < n {
        let g = parse_word(words[rng.gen_range(0..words.len())]).expect("fixed words parse");
        let z = random_point(rng, (-0.5, 0.5), (0.7, 1.4));
        if apply_moebius(&g, z).y >= 0.25 {
            out.push((g, z));
        }
    }
    out
}

fn trivial(group: CongruenceSubgroup, k: f64) -> maass_lab::Result<Arc<MultiplierSystem>> {
    Ok(Arc::new(MultiplierSystem::trivial_with_weight(
        group,
        c(k, 0.0),
    )?))
}

/// Largest `|Δ_k u - λu|` and `|E-_k u|` over the samples, relative to `1 + |u|`.
pub fn lift_eigen_residuals(
    u: &GeneralizedMaassForm,
    samples: &[(GroupElement, UHPoint)],
    h: f64,
) -> maass_lab::Result<(f64, f64)> {
    let k = u.weight;
    let mut lap_res = Vec::new();
    let mut low_res = Vec::new();
    for (_, z) in samples {
        let uz = u.eval(*z)?;
        let scale = 1.0 + uz.norm();
        let lap = extrapolated(h, |s| laplacian_fd(&u.evaluator, k, *z, s))?;
        let low = extrapolated(h, |s| maass_fd(Direction::Down, &u.evaluator, k, *z, s))?;
        lap_res.push((lap - u.eigenvalue() * uz).norm() / scale);
        low_res.push(low.norm() / scale);
    }
    Ok((max_of(lap_res), max_of(low_res)))
}

fn lift_cases(cfg: &RunConfig) -> Vec<Case> {
    let h = cfg.h;
    let mut out = Vec::new();
    for (name, k) in [("delta", 12u32), ("e4", 4u32)] {
        let id = format!("lift/{name}");
        out.push(Case::new(SUITE, id.clone(), move |rng| {
            let f = match k {
                12 => QExpansion::discriminant(80),
                _ => QExpansion::eisenstein(k, 80)?,
            };
            let kc = c(k as f64, 0.0);
            let u = lift_holomorphic(f, kc, trivial(CongruenceSubgroup::full(), k as f64)?)?;
            let samples = modular_samples(rng, LIFT_SAMPLES);
            let tr = verify_transformation(&u, &samples)?;
            let (lap, low) = lift_eigen_residuals(&u, &samples, h)?;
            let nu = Some(u.nu);
            Ok(vec![
                Check::exact(format!("{id}/transformation"), tr, TRANSFORMATION_TOL)
                    .params(Some(kc), nu)
                    .inputs(format!("samples={LIFT_SAMPLES}")),
                Check::fixed(format!("{id}/laplacian"), lap, EIGEN_TOL)
                    .params(Some(kc), nu)
                    .step(h)
                    .inputs("|Delta_k u - (k/2)(1-k/2) u|/(1+|u|);one Richardson step"),
                Check::fixed(format!("{id}/lowering"), low, EIGEN_TOL)
                    .params(Some(kc), nu)
                    .step(h)
                    .inputs("|E-_k u|/(1+|u|);one Richardson step"),
            ])
        }));
    }
    out
}

/// `Σ y^s |cz + d|^{-2s}` over the bottom rows of `Γ∞\Γ` with `c² + d² ≤ R²`, by direct
/// enumeration of coprime pairs.
pub fn brute_eisenstein(
    group: CongruenceSubgroup,
    z: UHPoint,
    s: Complex64,
    radius: i64,
) -> Complex64 {
    let n = group.level as i64;
    let minus_identity = match group.kind {
        SubgroupKind::Gamma0 => true,
        SubgroupKind::Gamma1 | SubgroupKind::Gamma => n <= 2,
    };
    let admissible = |cc: i64, d: i64| -> bool {
        match group.kind {
            SubgroupKind::Gamma0 => cc % n == 0,
            SubgroupKind::Gamma1 | SubgroupKind::Gamma => cc % n == 0 && (d - 1).rem_euclid(n) == 0,
        }
    };
    let mut sum = c(0.0, 0.0);
    for cc in -radius..=radius {
        for d in -radius..=radius {
            if cc * cc + d * d > radius * radius || cc.gcd(&d) != 1 || !admissible(cc, d) {
                continue;
            }
            // with -I in Γ keep one of ±(c, d)
            if minus_identity && (cc < 0 || (cc == 0 && d < 0)) {
                continue;
            }
            let w = c(cc as f64 * z.x + d as f64, cc as f64 * z.y);
            sum += c(z.y, 0.0).powc(s) / c(w.norm_sqr(), 0.0).powc(s);
        }
    }
    sum
}

fn eisenstein_cases(cfg: &RunConfig) -> CliResult<Vec<Case>> {
    let level = cfg.level.unwrap_or(1);
    let group = cfg.group(level)?;
    let nu = cfg.nu.unwrap_or(c(DEFAULT_NU, 0.0));
    let radius = cfg.radius.unwrap_or(DEFAULT_RADIUS);
    let spec = SeriesSpec::new(Seed::Power { nu }, trivial(group, 0.0)?, radius)?;
    let radii = [radius / 4.0, radius / 2.0, radius];
    let big = (4.0 * radius) as i64;
    let z = UHPoint { x: 0.0, y: 1.0 };
    let id = format!("eisenstein/{group}");
    Ok(vec![Case::new(SUITE, id.clone(), move |_| {
        let sums = spec.partial_sums(z, &radii)?;
        let s = 0.5 + nu;
        let reference = brute_eisenstein(group, z, s, big);
        let reference_err = spec.tail_bound(z, big as f64)?;
        let mut checks = Vec::new();
        for v in &sums {
            let brute = brute_eisenstein(group, z, s, v.radius as i64);
            checks.push(
                Check::exact(
                    format!("{id}/R={}/lattice-sum", v.radius),
                    (v.value - brute).norm() / brute.norm(),
                    1e-12,
                )
                .params(Some(c(0.0, 0.0)), Some(nu))
                .inputs(format!("z=i;terms={}", v.terms)),
            );
            checks.push(
                Check::fixed(
                    format!("{id}/R={}/tail", v.radius),
                    (v.value - reference).norm(),
                    v.tail_bound + reference_err,
                )
                .params(Some(c(0.0, 0.0)), Some(nu))
                .inputs(format!(
                    "z=i;reference radius {big};tolerance=tail_bound(R)+tail_bound({big})"
                )),
            );
        }
        let predicted = spec.tail_exponent();
        let tail_slope = max_of(sums.windows(2).map(|w| {
            let slope = (w[0].tail_bound / w[1].tail_bound).ln() / (w[1].radius / w[0].radius).ln();
            (slope / predicted - 1.0).abs()
        }));
        let ratio = (sums[2].value - sums[1].value).norm() / (sums[1].value - sums[0].value).norm();
        let increment_slope = (-ratio.ln() / 2f64.ln() / predicted - 1.0).abs();
        let inputs = format!("predicted exponent 2Re(nu)-1-2alpha={predicted}");
        checks.push(
            Check::fixed(format!("{id}/tail-slope"), tail_slope, SLOPE_TOL)
                .params(Some(c(0.0, 0.0)), Some(nu))
                .inputs(inputs.clone()),
        );
        checks.push(
            Check::fixed(format!("{id}/increment-slope"), increment_slope, SLOPE_TOL)
                .params(Some(c(0.0, 0.0)), Some(nu))
                .inputs(inputs),
        );
        Ok(checks)
    })])
}

fn eigen_residual(u: &GeneralizedMaassForm, z: UHPoint, h: f64) -> maass_lab::Result<f64> {
    let uz = u.eval(z)?;
    let lap = extrapolated(h, |s| laplacian_fd(&u.evaluator, u.weight, z, s))?;
    Ok((lap - u.eigenvalue() * uz).norm() / uz.norm())
}

fn expansion_cases(cfg: &RunConfig) -> CliResult<Vec<Case>> {
    let h = cfg.h;
    let mut out = Vec::new();
    let nu = c(0.3, 0.2);
    let k = c(0.5, 0.0);
    let kappa = 1.0 / 24.0;
    for (name, n, mtilde) in [
        ("A+", kappa, false),
        ("A-", kappa - 1.0, false),
        ("B", kappa, true),
    ] {
        let id = format!("expansion/eigen/{name}");
        out.push(Case::new(SUITE, id.clone(), move |_| {
            let full = CongruenceSubgroup::full();
            let inf = cusps(&CosetTable::new(full)?)?.remove(0);
            let base = FourierWhittakerExpansion::new(inf, kappa, nu, k, 1.0)?;
            let e = if mtilde {
                base.with_b(n, c(1.0, 0.0))?
            } else {
                base.with_a(n, c(1.0, 0.0))?
            };
            let u = e.to_form(Arc::new(MultiplierSystem::eta(full)?))?;
            let r = max_of(
                [UHPoint { x: 0.1, y: 0.8 }, UHPoint { x: -0.3, y: 1.5 }]
                    .into_iter()
                    .map(|z| eigen_residual(&u, z, h).unwrap_or(f64::NAN)),
            );
            Ok(vec![Check::fixed(id.clone(), r, EIGEN_TOL)
                .params(Some(k), Some(nu))
                .step(h)
                .inputs(format!(
                    "eta multiplier;single term at n={n};relative;one Richardson step"
                ))])
        }));
    }
    out.push(Case::new(
        SUITE,
        "expansion/zero-mode-rejected",
        move |_| {
            let inf = cusps(&CosetTable::new(CongruenceSubgroup::full())?)?.remove(0);
            let e = FourierWhittakerExpansion::new(inf, kappa, nu, k, 1.0)?;
            let accepted = e.with_zero_mode(c(1.0, 0.0), c(0.0, 0.0)).is_ok();
            Ok(vec![Check::fixed(
                "expansion/zero-mode-rejected",
                if accepted { 1.0 } else { 0.0 },
                0.0,
            )
            .inputs("kappa=1/24;C+=1;1 if accepted")])
        },
    ));
    out.push(Case::new(SUITE, "expansion/periodicity/inf", move |rng| {
        let full = CongruenceSubgroup::full();
        let inf = cusps(&CosetTable::new(full)?)?.remove(0);
        let e = FourierWhittakerExpansion::new(inf.clone(), kappa, nu, k, 1.0)?
            .with_a(kappa, c(1.0, -0.5))?
            .with_a(1.0 + kappa, c(0.3, 0.0))?
            .with_a(kappa - 1.0, c(0.0, 2.0))?
            .with_b(kappa, c(0.1, 0.1))?;
        let u = e.to_form(Arc::new(MultiplierSystem::eta(full)?))?;
        let samples: Vec<_> = (0..10)
            .map(|_| {
                (
                    inf.stabilizer.clone(),
                    random_point(rng, (-0.5, 0.5), (0.5, 2.0)),
                )
            })
            .collect();
        Ok(vec![Check::exact(
            "expansion/periodicity/inf",
            verify_transformation(&u, &samples)?,
            PERIODICITY_TOL,
        )
        .params(Some(k), Some(nu))
        .inputs("eta multiplier;samples=10")])
    }));
    out.push(Case::new(
        SUITE,
        "expansion/periodicity/Gamma0(2)-cusp0",
        |rng| {
            let g = CongruenceSubgroup::gamma0(2);
            let q = cusps(&CosetTable::new(g)?)?.remove(1);
            let nu = c(0.25, 0.1);
            let e = FourierWhittakerExpansion::new(q.clone(), 0.0, nu, c(0.0, 0.0), 4.0)?
                .with_a(1.0, c(1.0, 0.0))?
                .with_a(-1.0, c(0.5, 0.5))?
                .with_b(1.0, c(0.2, 0.0))?
                .with_zero_mode(c(0.5, 0.0), c(0.0, 0.1))?;
            let u = e.to_form(trivial(g, 0.0)?)?;
            let samples: Vec<_> = (0..10)
                .map(|_| {
                    (
                        q.stabilizer.clone(),
                        random_point(rng, (-0.3, 0.3), (0.2, 0.5)),
                    )
                })
                .collect();
            Ok(vec![Check::exact(
                "expansion/periodicity/Gamma0(2)-cusp0",
                verify_transformation(&u, &samples)?,
                PERIODICITY_TOL,
            )
            .params(Some(c(0.0, 0.0)), Some(nu))
            .inputs(format!("cusp {};width {};samples=10", q.q, q.width))])
        },
    ));
    Ok(out)
}

pub fn cases(cfg: &RunConfig) -> CliResult<Vec<Case>> {
    let mut out = lift_cases(cfg);
    out.extend(eisenstein_cases(cfg).map_err(|e| match e {
        CliError::Core(inner) => CliError::Config(format!("Eisenstein series parameters: {inner}")),
        other => other,
    })?);
    out.extend(expansion_cases(cfg)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_counts_pairs() {
        // s = 0 counts the bottom rows
        let z = UHPoint { x: 0.0, y: 1.0 };
        let full = brute_eisenstein(CongruenceSubgroup::full(), z, c(0.0, 0.0), 1);
        assert_eq!(full.re, 2.0); // (0,1), (1,0)
        let g02 = brute_eisenstein(CongruenceSubgroup::gamma0(2), z, c(0.0, 0.0), 3);
        // (0,1), (2,1), (2,-1)
        assert_eq!(g02.re, 3.0);
        let g3 = CongruenceSubgroup::new(SubgroupKind::Gamma1, 3).unwrap();
        // -I ∉ Γ1(3): (0,1), (±3,1), (±3,-2)
        let n = brute_eisenstein(g3, z, c(0.0, 0.0), 4);
        assert_eq!(n.re, 5.0);
    }
}
