use maass_lab::whittaker::{
    m_asymptote, normalized_w, ode_residual, w_asymptote, whittaker_m, whittaker_w, WhittakerParams,
};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{max_of, random_in_disc, Case, Check};
use crate::config::{CliResult, RunConfig};

const SUITE: &str = "whittaker";
const ODE_DRAWS: usize = 50;
const ODE_TOL: f64 = 1e-7;
const BRIDGE_TOL: f64 = 1e-10;
const ASYMPTOTIC_DRAWS: usize = 10;
const ASYMPTOTIC_Y: f64 = 80.0;
const ASYMPTOTIC_TOL: f64 = 1e-3;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `K_ν(x) = ∫_0^∞ e^{-x cosh t} cosh(νt) dt`, plain trapezoid (spectrally accurate here).
pub fn bessel_k(nu: Complex64, x: f64) -> Complex64 {
    let h = 1.0 / 256.0;
    let mut s = 0.5 * (-x).exp() * c(1.0, 0.0);
    let mut t: f64 = h;
    loop {
        let e = (-x * t.cosh()).exp();
        if e < 1e-300 {
            break;
        }
        s += e * (nu * t).cosh();
        t += h;
    }
    s * h
}

fn ode_case(which: char, p: WhittakerParams, y: f64) -> maass_lab::Result<f64> {
    match which {
        'W' => ode_residual(p, y, |t| whittaker_w(p, t).map(|r| r.value)),
        _ => ode_residual(p, y, |t| whittaker_m(p, t).map(|r| r.value)),
    }
}

/// Leading terms of the asymptotic series: `W ~ e^{-y/2} y^k Σ (1/2+ν-k)_n (1/2-ν-k)_n (-y)^{-n} / n!`
/// and `M ~ … Σ (1/2+ν+k)_n (1/2-ν+k)_n y^{-n} / n!`, through `n = 2`.
pub fn asymptotic_correction(which: char, p: WhittakerParams, y: f64) -> Complex64 {
    let (a, b, sign) = match which {
        'W' => (0.5 + p.nu - p.k, 0.5 - p.nu - p.k, -1.0),
        _ => (0.5 + p.nu + p.k, 0.5 - p.nu + p.k, 1.0),
    };
    let t1 = a * b * sign / y;
    let t2 = a * (a + 1.0) * b * (b + 1.0) / (2.0 * y * y);
    1.0 + t1 + t2
}

/// `|f / (asymptote · correction) - 1|`, and the uncorrected `|f / asymptote - 1|`.
pub fn asymptotic_ratios(which: char, p: WhittakerParams, y: f64) -> maass_lab::Result<(f64, f64)> {
    let ratio = match which {
        'W' => whittaker_w(p, y)?.value / w_asymptote(p, y),
        _ => whittaker_m(p, y)?.value / m_asymptote(p, y)?,
    };
    let corrected = ratio / asymptotic_correction(which, p, y);
    Ok(((corrected - 1.0).norm(), (ratio - 1.0).norm()))
}

/// Parameters with `|k|, |ν| ≤ r`, kept away from the points where `M` loses its growth.
pub fn admissible_draw(rng: &mut ChaCha8Rng, r: f64) -> WhittakerParams {
    loop {
        let p = WhittakerParams::new(random_in_disc(rng, r), random_in_disc(rng, r));
        // k - ν near 1/2 + ℕ makes the leading coefficient of M vanish
        let d = p.k - p.nu - 0.5;
        if d.im.abs() > 0.05 || d.re < -0.05 || (d.re - d.re.round()).abs() > 0.05 {
            return p;
        }
    }
}

pub fn cases(cfg: &RunConfig) -> CliResult<Vec<Case>> {
    let mut out = Vec::new();
    for which in ['W', 'M'] {
        out.push(Case::new(SUITE, format!("ode/{which}"), move |rng| {
            let mut worst = Vec::new();
            for _ in 0..ODE_DRAWS {
                let p = WhittakerParams::new(random_in_disc(rng, 3.0), random_in_disc(rng, 3.0));
                let y = rng.gen_range(0.5..40.0);
                worst.push(ode_case(which, p, y)?);
            }
            Ok(vec![Check::fixed(
                format!("ode/{which}"),
                max_of(worst),
                ODE_TOL,
            )
            .inputs(format!(
                "draws={ODE_DRAWS};|k|,|nu|<=3;y in [0.5,40]"
            ))])
        }));
    }
    if let (Some(k), Some(nu)) = (cfg.k, cfg.nu) {
        for which in ['W', 'M'] {
            out.push(Case::new(SUITE, format!("ode/{which}/given"), move |_| {
                let p = WhittakerParams::new(k, nu);
                let r = max_of(
                    [1.0, 5.0, 20.0]
                        .into_iter()
                        .map(|y| ode_case(which, p, y).unwrap_or(f64::NAN)),
                );
                Ok(vec![Check::fixed(format!("ode/{which}/given"), r, ODE_TOL)
                    .params(Some(k), Some(nu))
                    .inputs("y=1,5,20")])
            }));
        }
    }
    for (label, nu) in [
        ("1/4", c(0.25, 0.0)),
        ("1/3", c(1.0 / 3.0, 0.0)),
        ("1+i/2", c(1.0, 0.5)),
    ] {
        let id = format!("bessel/nu={label}");
        out.push(Case::new(SUITE, id.clone(), move |_| {
            let p = WhittakerParams::new(c(0.0, 0.0), nu);
            let mut rel = Vec::new();
            for i in 0..20 {
                let y = 1.0 + 19.0 * i as f64 / 19.0;
                let w = normalized_w(p, y)?.value;
                let want = (y / std::f64::consts::PI).sqrt() * bessel_k(nu, y / 2.0);
                rel.push((w - want).norm() / want.norm());
            }
            Ok(vec![Check::fixed(id.clone(), max_of(rel), BRIDGE_TOL)
                .params(Some(c(0.0, 0.0)), Some(nu))
                .inputs(
                    "20-point grid y in [1,20];W(y) vs sqrt(y/pi) K_nu(y/2)",
                )])
        }));
    }
    for which in ['W', 'M'] {
        let id = format!("asymptotic/{which}");
        out.push(Case::new(SUITE, id.clone(), move |rng| {
            let mut worst = Vec::new();
            for _ in 0..ASYMPTOTIC_DRAWS {
                let p = admissible_draw(rng, 1.0);
                worst.push(asymptotic_ratios(which, p, ASYMPTOTIC_Y)?.0);
            }
            Ok(vec![Check::fixed(
                id.clone(),
                max_of(worst),
                ASYMPTOTIC_TOL,
            )
            .inputs(format!(
                "draws={ASYMPTOTIC_DRAWS};|k|,|nu|<=1;y={ASYMPTOTIC_Y};two correction terms"
            ))])
        }));
    }
    Ok(out)
}
