//! Confluent hypergeometric functions `₁F₁` and `U` for real positive argument.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use super::gamma::rgamma;
use super::{EvalResult, Method};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const MAX_TERMS: usize = 20_000;

fn near_nonpositive_integer(z: Complex64, tol: f64) -> bool {
    z.re < 0.5 && (z.re - z.re.round()).abs() <= tol && z.im.abs() <= tol
}

/// Sums `Σ c_n` where `c_{n+1} = c_n · (a+n) y / ((b+n)(n+1))`, starting at `n = start`.
/// Returns (sum, sum of |terms|, tail bound).
fn ratio_series(
    a: Complex64,
    b: Complex64,
    y: f64,
    start: usize,
    first: Complex64,
) -> Result<(Complex64, f64, f64)> {
    let mut term = first;
    let mut sum = first;
    let mut abs_sum = first.norm();
    let mut n = start;
    loop {
        if term.norm() == 0.0 && n > start {
            return Ok((sum, abs_sum, 0.0));
        }
        let fac = (a + n as f64) * y / ((b + n as f64) * (n as f64 + 1.0));
        term *= fac;
        sum += term;
        abs_sum += term.norm();
        n += 1;
        let r = ((a + n as f64) * y / ((b + n as f64) * (n as f64 + 1.0))).norm();
        if term.norm() == 0.0 {
            return Ok((sum, abs_sum, 0.0));
        }
        if r < 0.5 && term.norm() <= EPS * sum.norm() {
            let tail = term.norm() * r / (1.0 - r);
            return Ok((sum, abs_sum, tail));
        }
        if n - start > MAX_TERMS {
            return Err(Error::NonConvergence {
                method: "1F1 series",
                detail: format!("a={a}, b={b}, y={y}: no convergence after {MAX_TERMS} terms"),
            });
        }
    }
}

/// Kummer's function `M(a, b, y) = ₁F₁(a; b; y)`.
pub fn kummer_m(a: Complex64, b: Complex64, y: f64) -> Result<EvalResult> {
    if near_nonpositive_integer(b, 0.0) {
        return Err(Error::Pole {
            function: "kummer_M",
            at: format!("b = {b}"),
        });
    }
    if y.is_nan() || y < 0.0 {
        return Err(Error::Condition(format!("kummer_M needs y >= 0, got {y}")));
    }
    if near_nonpositive_integer(b, 1e-6) {
        // the direct series is badly conditioned next to a pole of b
        let reg = kummer_m_regularized(a, b, y)?;
        let g = super::gamma::gamma_complex(b)?;
        return Ok(EvalResult {
            value: reg.value * g,
            abs_error_estimate: reg.abs_error_estimate * g.norm()
                + 4.0 * EPS * (reg.value * g).norm(),
            method: Method::Series,
        });
    }
    let (sum, abs_sum, tail) = ratio_series(a, b, y, 0, Complex64::new(1.0, 0.0))?;
    Ok(EvalResult {
        value: sum,
        abs_error_estimate: tail + 8.0 * EPS * abs_sum,
        method: Method::Series,
    })
}

/// The regularized function `₁F₁(a; b; y) / Γ(b)`, entire in `b`.
pub fn kummer_m_regularized(a: Complex64, b: Complex64, y: f64) -> Result<EvalResult> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::Condition(format!("kummer_M needs y >= 0, got {y}")));
    }
    // terms with small Re(b+n) are formed directly; from n0 on the ratio recurrence is safe
    let n0 = if b.re < 1.0 {
        (1.0 - b.re).ceil() as usize
    } else {
        0
    };
    let mut head = Complex64::new(0.0, 0.0);
    let mut head_abs = 0.0;
    let mut poch = Complex64::new(1.0, 0.0);
    let mut pow_fact = 1.0;
    for n in 0..n0 {
        let t = poch * rgamma(b + n as f64) * pow_fact;
        head += t;
        head_abs += t.norm();
        poch *= a + n as f64;
        pow_fact *= y / (n as f64 + 1.0);
    }
    let first = poch * rgamma(b + n0 as f64) * pow_fact;
    let (sum, abs_sum, tail) = ratio_series(a, b, y, n0, first)?;
    let value = head + sum;
    Ok(EvalResult {
        value,
        abs_error_estimate: tail + 64.0 * EPS * (abs_sum + head_abs),
        method: Method::Series,
    })
}

/// Asymptotic expansion `U ~ y^{-a} Σ (a)_n (a-b+1)_n (-1/y)^n / n!`, truncated at its
/// smallest term. `None` if the first terms already grow.
pub(crate) fn tricomi_u_asymptotic(a: Complex64, b: Complex64, y: f64) -> Option<EvalResult> {
    let c = a - b + 1.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut abs_sum = 1.0;
    for n in 0..MAX_TERMS {
        let next = term * (a + n as f64) * (c + n as f64) / ((n as f64 + 1.0) * -y);
        if next.norm() == 0.0 {
            let scale = (-a * y.ln()).exp();
            return Some(EvalResult {
                value: sum * scale,
                abs_error_estimate: 8.0 * EPS * abs_sum * scale.norm(),
                method: Method::Asymptotic,
            });
        }
        if next.norm() >= term.norm() && n > 0 {
            // smallest term reached; error bounded by the first omitted term
            let scale = (-a * y.ln()).exp();
            return Some(EvalResult {
                value: sum * scale,
                abs_error_estimate: (next.norm() + 8.0 * EPS * abs_sum) * scale.norm(),
                method: Method::Asymptotic,
            });
        }
        term = next;
        sum += term;
        abs_sum += term.norm();
        if term.norm() <= 0.25 * EPS * sum.norm() {
            let scale = (-a * y.ln()).exp();
            return Some(EvalResult {
                value: sum * scale,
                abs_error_estimate: (term.norm() + 8.0 * EPS * abs_sum) * scale.norm(),
                method: Method::Asymptotic,
            });
        }
    }
    None
}

/// Point on the exp-sinh grid: `t = τ exp(π/2 sinh u)`; returns log of the weighted integrand.
fn laplace_log_integrand(
    a: Complex64,
    b: Complex64,
    y: f64,
    ln_tau: f64,
    u: f64,
) -> Option<Complex64> {
    let w = FRAC_PI_2 * u.sinh();
    let ln_t = ln_tau + w;
    if ln_t > 700.0 {
        return None;
    }
    let t = ln_t.exp();
    let ln_1pt = t.ln_1p();
    let jac = (FRAC_PI_2 * u.cosh()).ln();
    Some(-y * t + a * ln_t + (b - a - 1.0) * ln_1pt + jac)
}

/// `U(a, b, y) = Γ(a)^{-1} ∫_0^∞ e^{-yt} t^{a-1} (1+t)^{b-a-1} dt`, requires `Re a > 0`.
fn tricomi_u_laplace(a: Complex64, b: Complex64, y: f64) -> Result<EvalResult> {
    debug_assert!(a.re > 0.0);
    // center the grid on the maximum of the real part of the log integrand
    let (ar, br) = (a.re, (b - a - 1.0).re);
    let p = ar + br - y;
    let tau = (p + (p * p + 4.0 * y * ar).sqrt()) / (2.0 * y);
    let ln_tau = tau.ln();
    let shift = laplace_log_integrand(a, b, y, ln_tau, 0.0)
        .map(|l| l.re)
        .unwrap_or(0.0);

    let eval = |u: f64| -> Complex64 {
        match laplace_log_integrand(a, b, y, ln_tau, u) {
            Some(l) => (l - shift).exp(),
            None => Complex64::new(0.0, 0.0),
        }
    };
    // sum f(u) over u = offset + j*step for j in Z, both directions until negligible
    let sweep = |offset: f64, step: f64, include_center: bool| -> (Complex64, f64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut s_abs = 0.0;
        for dir in [1.0, -1.0] {
            let mut j = if include_center && dir < 0.0 { 1 } else { 0 };
            loop {
                let u = dir * (offset + j as f64 * step);
                let f = eval(u);
                s += f;
                s_abs += f.norm();
                if (f.norm() <= 1e-20 * s_abs.max(1e-300) && u.abs() > 1.0) || u.abs() > 8.0 {
                    break;
                }
                j += 1;
            }
        }
        (s, s_abs)
    };

    let mut h = 0.5;
    let (mut total, mut total_abs) = sweep(0.0, h, true);
    let mut estimate = total * h;
    let mut rel_diff = f64::INFINITY;
    for _ in 0..9 {
        let (odd, odd_abs) = sweep(h / 2.0, h, false);
        total += odd;
        total_abs += odd_abs;
        h /= 2.0;
        let next = total * h;
        rel_diff = (next - estimate).norm() / next.norm().max(1e-300);
        estimate = next;
        if rel_diff < 1e-9 {
            break;
        }
    }
    if rel_diff.is_nan() || rel_diff >= 1e-6 || !estimate.re.is_finite() || !estimate.im.is_finite()
    {
        return Err(Error::NonConvergence {
            method: "Laplace quadrature for U",
            detail: format!("a={a}, b={b}, y={y}: relative change {rel_diff:e} at step {h}"),
        });
    }
    let cond = total_abs / total.norm().max(1e-300);
    let factor = rgamma(a) * shift.exp();
    let value = estimate * factor;
    // the trapezoid error is roughly the square of the last relative change
    let rel_err = rel_diff * rel_diff * 16.0 + 64.0 * EPS * cond;
    Ok(EvalResult {
        value,
        abs_error_estimate: rel_err * value.norm(),
        method: Method::Integral,
    })
}

/// `U(a, b, y)` from the Laplace integral, after Kummer's transformation and a downward
/// recurrence in `a` when the integral is not directly applicable.
pub(crate) fn tricomi_u_integral(a: Complex64, b: Complex64, y: f64) -> Result<EvalResult> {
    // U(a,b,y) = y^{1-b} U(a-b+1, 2-b, y)
    let (a1, b1, pref) = if (a - b + 1.0).re > a.re {
        (a - b + 1.0, 2.0 - b, ((1.0 - b) * y.ln()).exp())
    } else {
        (a, b, Complex64::new(1.0, 0.0))
    };
    if a1.re >= 1.0 {
        let r = tricomi_u_laplace(a1, b1, y)?;
        return Ok(EvalResult {
            value: r.value * pref,
            abs_error_estimate: r.abs_error_estimate * pref.norm(),
            method: Method::Integral,
        });
    }
    let m = (1.0 - a1.re).ceil() as usize;
    let top = tricomi_u_laplace(a1 + m as f64, b1, y)?;
    let above = tricomi_u_laplace(a1 + m as f64 + 1.0, b1, y)?;
    let rel0 = (top.abs_error_estimate / top.value.norm())
        .max(above.abs_error_estimate / above.value.norm());
    // U(a-1) = -(b - 2a - y) U(a) - a (a - b + 1) U(a+1)
    let (mut cur, mut next) = (top.value, above.value);
    let mut largest = cur.norm().max(next.norm());
    for j in (0..m).rev() {
        let aa = a1 + (j + 1) as f64;
        let t1 = -(b1 - 2.0 * aa - y) * cur;
        let t2 = -aa * (aa - b1 + 1.0) * next;
        largest = largest.max(t1.norm()).max(t2.norm());
        let prev = t1 + t2;
        next = cur;
        cur = prev;
    }
    let value = cur * pref;
    let rel = rel0 * (m as f64 + 1.0) * (largest / cur.norm().max(1e-300)) + 16.0 * EPS * m as f64;
    Ok(EvalResult {
        value,
        abs_error_estimate: rel * value.norm(),
        method: Method::Integral,
    })
}

/// Tricomi's function `U(a, b, y)` for `y > 0`. The asymptotic expansion is used when its
/// own error estimate reaches full precision; otherwise the integral route.
pub fn tricomi_u(a: Complex64, b: Complex64, y: f64) -> Result<EvalResult> {
    if y.is_nan() || y <= 0.0 {
        return Err(Error::Condition(format!("U needs y > 0, got {y}")));
    }
    if let Some(r) = tricomi_u_asymptotic(a, b, y) {
        if r.abs_error_estimate <= 1e-14 * r.value.norm() {
            return Ok(r);
        }
    }
    tricomi_u_integral(a, b, y)
}

/// `U(a, b, y)` through the connection formula with two regularized `₁F₁` series.
/// Needs `b` away from the integers.
pub(crate) fn tricomi_u_series(a: Complex64, b: Complex64, y: f64) -> Result<EvalResult> {
    let s = (std::f64::consts::PI * b).sin();
    if s.norm() < 1e-8 {
        return Err(Error::Condition(format!(
            "series route for U needs b away from the integers, got b = {b}"
        )));
    }
    let m1 = kummer_m_regularized(a, b, y)?;
    let m2 = kummer_m_regularized(a - b + 1.0, 2.0 - b, y)?;
    let pw = ((1.0 - b) * y.ln()).exp();
    let c1 = rgamma(a - b + 1.0);
    let c2 = rgamma(a) * pw;
    let pi_s = std::f64::consts::PI / s;
    let t1 = m1.value * c1 * pi_s;
    let t2 = m2.value * c2 * pi_s;
    let value = t1 - t2;
    let err = (m1.abs_error_estimate * c1.norm() + m2.abs_error_estimate * c2.norm()) * pi_s.norm()
        + 16.0 * EPS * (t1.norm() + t2.norm());
    Ok(EvalResult {
        value,
        abs_error_estimate: err,
        method: Method::Series,
    })
}
