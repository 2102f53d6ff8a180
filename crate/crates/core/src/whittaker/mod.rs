//! Whittaker functions of complex indices and real positive argument.
//!
//! `M_{k,ν}(y) = e^{-y/2} y^{ν+1/2} ₁F₁(ν-k+1/2; 1+2ν; y)` and
//! `W_{k,ν}(y) = e^{-y/2} y^{ν+1/2} U(ν-k+1/2, 1+2ν, y)`, together with the normalized pair
//! `W̃ = W`, `M̃ = Γ(1/2+ν-k)/Γ(1+2ν) · M`.

mod gamma;
mod hypergeometric;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use gamma::{gamma_complex, rgamma};
pub use hypergeometric::{kummer_m, kummer_m_regularized, tricomi_u};

/// Indices of the Whittaker equation `G'' + (-1/4 + k/y + (1/4 - ν²)/y²) G = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhittakerParams {
    pub k: Complex64,
    pub nu: Complex64,
}

impl WhittakerParams {
    pub fn new(k: Complex64, nu: Complex64) -> Self {
        WhittakerParams { k, nu }
    }

    pub fn real(k: f64, nu: f64) -> Self {
        WhittakerParams::new(Complex64::new(k, 0.0), Complex64::new(nu, 0.0))
    }

    /// The potential `-1/4 + k/y + (1/4 - ν²)/y²`.
    pub fn potential(&self, y: f64) -> Complex64 {
        -0.25 + self.k / y + (0.25 - self.nu * self.nu) / (y * y)
    }

    fn a(&self) -> Complex64 {
        self.nu - self.k + 0.5
    }

    fn b(&self) -> Complex64 {
        1.0 + 2.0 * self.nu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Series,
    Integral,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub method: Method,
}

impl EvalResult {
    fn scaled(self, factor: Complex64) -> Self {
        EvalResult {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.norm()
                + 4.0 * f64::EPSILON * (self.value * factor).norm(),
            method: self.method,
        }
    }

    pub fn relative_error(&self) -> f64 {
        self.abs_error_estimate / self.value.norm()
    }
}

fn check_y(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(Error::Condition(format!(
            "Whittaker functions need y > 0, got {y}"
        )))
    }
}

/// `e^{-y/2} y^{ν+1/2}`
fn prefactor(p: &WhittakerParams, y: f64) -> Complex64 {
    (-0.5 * y + (p.nu + 0.5) * y.ln()).exp()
}

/// The solution decaying like `e^{-y/2} y^k`.
pub fn whittaker_w(p: WhittakerParams, y: f64) -> Result<EvalResult> {
    check_y(y)?;
    let u = tricomi_u(p.a(), p.b(), y)?;
    Ok(u.scaled(prefactor(&p, y)))
}

/// `W` forced through the Laplace integral (with Kummer transformation and recurrence).
pub fn whittaker_w_integral(p: WhittakerParams, y: f64) -> Result<EvalResult> {
    check_y(y)?;
    let u = hypergeometric::tricomi_u_integral(p.a(), p.b(), y)?;
    Ok(u.scaled(prefactor(&p, y)))
}

/// `W` from the connection formula with two convergent `₁F₁` series; needs `2ν ∉ ℤ`.
pub fn whittaker_w_series(p: WhittakerParams, y: f64) -> Result<EvalResult> {
    check_y(y)?;
    let u = hypergeometric::tricomi_u_series(p.a(), p.b(), y)?;
    Ok(u.scaled(prefactor(&p, y)))
}

/// The solution behaving like `y^{ν+1/2}` at zero.
pub fn whittaker_m(p: WhittakerParams, y: f64) -> Result<EvalResult> {
    check_y(y)?;
    let m = kummer_m(p.a(), p.b(), y).map_err(|e| match e {
        Error::Pole { .. } => Error::Pole {
            function: "whittaker_M",
            at: format!("1+2ν = {} is a non-positive integer", p.b()),
        },
        other => other,
    })?;
    Ok(m.scaled(prefactor(&p, y)))
}

/// `W̃_{k,ν} = W_{k,ν}`.
pub fn normalized_w(p: WhittakerParams, y: f64) -> Result<EvalResult> {
    whittaker_w(p, y)
}

/// `M̃_{k,ν} = Γ(1/2+ν-k)/Γ(1+2ν) · M_{k,ν}`, computed from the `b`-regularized series so it
/// stays defined when `1+2ν` is a non-positive integer.
pub fn normalized_m(p: WhittakerParams, y: f64) -> Result<EvalResult> {
    check_y(y)?;
    let g = gamma_complex(p.a()).map_err(|_| {
        Error::Condition(format!(
            "normalized M needs 1/2+ν-k off the poles of Gamma (k-ν not in 1/2+ℕ), got k={}, ν={}",
            p.k, p.nu
        ))
    })?;
    let reg = kummer_m_regularized(p.a(), p.b(), y)?;
    Ok(reg.scaled(g * prefactor(&p, y)))
}

/// Leading behaviour `e^{-y/2} y^k` of `W`.
pub fn w_asymptote(p: WhittakerParams, y: f64) -> Complex64 {
    (-0.5 * y + p.k * y.ln()).exp()
}

/// Leading behaviour `Γ(1+2ν)/Γ(1/2+ν-k) · e^{y/2} y^{-k}` of `M`; the growth is absent
/// (and the call fails) when `k-ν ∈ {1/2, 3/2, ...}`.
pub fn m_asymptote(p: WhittakerParams, y: f64) -> Result<Complex64> {
    let r = rgamma(p.a());
    if r.norm() == 0.0 {
        return Err(Error::Condition(format!(
            "k-ν = {} lies in 1/2+ℕ, M has no exponential growth",
            p.k - p.nu
        )));
    }
    let g = gamma_complex(p.b())?;
    Ok(g * r * (0.5 * y - p.k * y.ln()).exp())
}

/// Relative residual of the Whittaker equation for `f` at `y`, with a five-point
/// fourth-order stencil for the second derivative.
pub fn ode_residual<F>(p: WhittakerParams, y: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let h = (0.02f64).min(y / 200.0);
    let f0 = f(y)?;
    let second = (-f(y + 2.0 * h)? + 16.0 * f(y + h)? - 30.0 * f0 + 16.0 * f(y - h)?
        - f(y - 2.0 * h)?)
        / (12.0 * h * h);
    let res = second + p.potential(y) * f0;
    let scale = f0.norm() * (0.25 + p.k.norm() / y + (0.25 - p.nu * p.nu).norm() / (y * y));
    Ok(res.norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn w_half_is_exponential() {
        for y in [1.0, 4.0, 10.0] {
            let w = whittaker_w(WhittakerParams::real(0.0, 0.5), y).unwrap();
            assert!((w.value - c((-y / 2.0).exp(), 0.0)).norm() < 1e-13 * (-y / 2.0f64).exp());
        }
    }

    #[test]
    fn m_half_is_sinh() {
        for y in [1.0, 4.0] {
            let m = whittaker_m(WhittakerParams::real(0.0, 0.5), y).unwrap();
            let want = 2.0 * (y / 2.0).sinh();
            assert!((m.value.re - want).abs() < 1e-13 * want);
            let mt = normalized_m(WhittakerParams::real(0.0, 0.5), y).unwrap();
            assert!((mt.value.re - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn m_near_zero() {
        let p = WhittakerParams::new(c(0.7, -0.2), c(0.4, 0.9));
        let y = 1e-4;
        let m = whittaker_m(p, y).unwrap().value;
        let lead = ((p.nu + 0.5) * y.ln()).exp();
        assert!((m / lead - 1.0).norm() < 1e-3);
    }

    #[test]
    fn normalized_w_is_w() {
        let p = WhittakerParams::real(1.0 / 3.0, 0.2);
        assert_eq!(
            normalized_w(p, 2.0).unwrap().value,
            whittaker_w(p, 2.0).unwrap().value
        );
    }

    #[test]
    fn normalized_m_prefactor_pole() {
        // 1/2 + ν - k = 0
        let p = WhittakerParams::real(1.0, 0.5);
        assert!(matches!(normalized_m(p, 1.0), Err(Error::Condition(_))));
        assert!(m_asymptote(p, 10.0).is_err());
    }

    #[test]
    fn normalized_m_at_negative_half_integer_nu() {
        // ν = -1 makes 1+2ν = -1; M itself is undefined, the normalized variant is not
        let p = WhittakerParams::real(0.2, -1.0);
        assert!(whittaker_m(p, 2.0).is_err());
        let at = normalized_m(p, 2.0).unwrap().value;
        let near = normalized_m(WhittakerParams::real(0.2, -1.0 + 1e-7), 2.0)
            .unwrap()
            .value;
        assert!((at - near).norm() < 1e-5 * at.norm());
    }

    #[test]
    fn ode_residual_reference_point() {
        let p = WhittakerParams::new(c(0.25, 0.2), c(2.0 / 7.0, 0.0));
        let rw = ode_residual(p, 3.0, |t| whittaker_w(p, t).map(|r| r.value)).unwrap();
        let rm = ode_residual(p, 3.0, |t| whittaker_m(p, t).map(|r| r.value)).unwrap();
        assert!(rw < 1e-8, "{rw}");
        assert!(rm < 1e-8, "{rm}");
    }

    #[test]
    fn ode_residual_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let k = c(rng.gen_range(-2.1..2.1), rng.gen_range(-2.1..2.1));
            let nu = c(rng.gen_range(-2.1..2.1), rng.gen_range(-2.1..2.1));
            let y = rng.gen_range(0.5..40.0);
            let p = WhittakerParams::new(k, nu);
            let rw = ode_residual(p, y, |t| whittaker_w(p, t).map(|r| r.value)).unwrap();
            assert!(rw < 1e-7, "W residual {rw} at k={k} nu={nu} y={y}");
            let rm = ode_residual(p, y, |t| whittaker_m(p, t).map(|r| r.value)).unwrap();
            assert!(rm < 1e-7, "M residual {rm} at k={k} nu={nu} y={y}");
        }
    }

    #[test]
    fn series_and_integral_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let p = WhittakerParams::new(
                c(rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0)),
                c(rng.gen_range(-0.45..0.45), rng.gen_range(-1.0..1.0)),
            );
            let y = rng.gen_range(5.0..15.0);
            let i = whittaker_w_integral(p, y).unwrap();
            let s = whittaker_w_series(p, y).unwrap();
            let diff = (i.value - s.value).norm();
            assert!(
                diff <= 1e-9 * i.value.norm(),
                "k={} nu={} y={y}: {diff:e}",
                p.k,
                p.nu
            );
            assert!(diff <= i.abs_error_estimate + s.abs_error_estimate);
        }
    }

    #[test]
    fn asymptotic_ratios_approach_one() {
        let pw = WhittakerParams::real(1.0, 1.0 / 3.0);
        let pm = WhittakerParams::real(0.0, 1.0 / 3.0);
        let mut last = (f64::INFINITY, f64::INFINITY);
        for y in [40.0, 60.0, 80.0] {
            let rw = (whittaker_w(pw, y).unwrap().value / w_asymptote(pw, y) - 1.0).norm();
            let rm = (whittaker_m(pm, y).unwrap().value / m_asymptote(pm, y).unwrap() - 1.0).norm();
            assert!(rw < last.0 && rm < last.1);
            last = (rw, rm);
        }
        assert!(last.0 < 3e-3 && last.1 < 3e-3);
    }

    /// `K_ν(x) = ∫_0^∞ e^{-x cosh t} cosh(νt) dt` by plain trapezoid.
    fn bessel_k(nu: Complex64, x: f64) -> Complex64 {
        let h: f64 = 1.0 / 256.0;
        let mut s = 0.5 * (-x).exp() * c(1.0, 0.0);
        let mut t = h;
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

    #[test]
    fn bessel_bridge() {
        for nu in [c(0.25, 0.0), c(1.0 / 3.0, 0.0), c(1.0, 0.5)] {
            let p = WhittakerParams::new(c(0.0, 0.0), nu);
            for y in [1.0, 2.0, 5.5, 8.0, 13.0, 20.0] {
                let w = normalized_w(p, y).unwrap().value;
                let want = (y / std::f64::consts::PI).sqrt() * bessel_k(nu, y / 2.0);
                assert!(
                    (w - want).norm() < 1e-10 * want.norm(),
                    "nu={nu} y={y}: {w} vs {want}"
                );
            }
        }
    }
}
