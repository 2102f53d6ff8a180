//! The weight-k Laplacian `Δ_k = -y²(∂x² + ∂y²) + iky∂x` and the Maass operators
//! `E±_k = ±2iy∂x + 2y∂y ± k`, by finite differences and exactly on Whittaker basis terms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modgroup::{slash, GroupElement, HFn, UHPoint};
use crate::whittaker::{normalized_m, normalized_w, rgamma, WhittakerParams};

/// A function on the upper half-plane with optional weight and eigenvalue tags.
#[derive(Clone)]
pub struct SmoothEvaluator {
    f: HFn,
    pub weight: Option<Complex64>,
    pub eigenvalue: Option<Complex64>,
}

impl fmt::Debug for SmoothEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothEvaluator")
            .field("weight", &self.weight)
            .field("eigenvalue", &self.eigenvalue)
            .finish_non_exhaustive()
    }
}

impl SmoothEvaluator {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(UHPoint) -> Result<Complex64> + Send + Sync + 'static,
    {
        SmoothEvaluator {
            f: Arc::new(f),
            weight: None,
            eigenvalue: None,
        }
    }

    pub fn from_hfn(f: HFn) -> Self {
        SmoothEvaluator {
            f,
            weight: None,
            eigenvalue: None,
        }
    }

    pub fn with_weight(mut self, k: Complex64) -> Self {
        self.weight = Some(k);
        self
    }

    pub fn with_eigenvalue(mut self, lambda: Complex64) -> Self {
        self.eigenvalue = Some(lambda);
        self
    }

    pub fn eval(&self, z: UHPoint) -> Result<Complex64> {
        (self.f)(z)
    }

    pub fn hfn(&self) -> HFn {
        Arc::clone(&self.f)
    }

    /// `u |_k g`
    pub fn slashed(&self, k: Complex64, g: GroupElement) -> Self {
        SmoothEvaluator::from_hfn(slash(self.hfn(), k, g))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// Effective step: `h` relative to `y`, never more than `y/4`.
fn step(z: UHPoint, h: f64) -> f64 {
    (h * z.y).min(z.y / 4.0)
}

struct Derivatives {
    ux: Complex64,
    uxx: Complex64,
    uyy: Complex64,
}

fn at(u: &SmoothEvaluator, z: UHPoint, dx: f64, dy: f64) -> Result<Complex64> {
    u.eval(UHPoint {
        x: z.x + dx,
        y: z.y + dy,
    })
}

fn first_derivatives(
    u: &SmoothEvaluator,
    z: UHPoint,
    h: f64,
) -> Result<(Complex64, Complex64, Complex64)> {
    let s = step(z, h);
    let ux = (at(u, z, s, 0.0)? - at(u, z, -s, 0.0)?) / (2.0 * s);
    let uy = (at(u, z, 0.0, s)? - at(u, z, 0.0, -s)?) / (2.0 * s);
    Ok((u.eval(z)?, ux, uy))
}

fn all_derivatives(u: &SmoothEvaluator, z: UHPoint, h: f64) -> Result<Derivatives> {
    let s = step(z, h);
    let u0 = u.eval(z)?;
    let (xp, xm) = (at(u, z, s, 0.0)?, at(u, z, -s, 0.0)?);
    let (xp2, xm2) = (at(u, z, 2.0 * s, 0.0)?, at(u, z, -2.0 * s, 0.0)?);
    let (yp, ym) = (at(u, z, 0.0, s)?, at(u, z, 0.0, -s)?);
    let (yp2, ym2) = (at(u, z, 0.0, 2.0 * s)?, at(u, z, 0.0, -2.0 * s)?);
    let second = |p2: Complex64, p1: Complex64, m1: Complex64, m2: Complex64| {
        (-p2 + 16.0 * p1 - 30.0 * u0 + 16.0 * m1 - m2) / (12.0 * s * s)
    };
    Ok(Derivatives {
        ux: (xp - xm) / (2.0 * s),
        uxx: second(xp2, xp, xm, xm2),
        uyy: second(yp2, yp, ym, ym2),
    })
}

/// `Δ_k u (z)` by central differences.
pub fn laplacian_fd(u: &SmoothEvaluator, k: Complex64, z: UHPoint, h: f64) -> Result<Complex64> {
    let d = all_derivatives(u, z, h)?;
    let y = z.y;
    Ok(-y * y * (d.uxx + d.uyy) + Complex64::i() * k * y * d.ux)
}

/// `E±_k u (z)` by central differences.
pub fn maass_fd(
    direction: Direction,
    u: &SmoothEvaluator,
    k: Complex64,
    z: UHPoint,
    h: f64,
) -> Result<Complex64> {
    let (u0, ux, uy) = first_derivatives(u, z, h)?;
    let y = z.y;
    let i = Complex64::i();
    Ok(match direction {
        Direction::Up => 2.0 * i * y * ux + 2.0 * y * uy + k * u0,
        Direction::Down => -2.0 * i * y * ux + 2.0 * y * uy - k * u0,
    })
}

/// `E±_k u` as a new evaluator (differences taken with relative step `h`).
pub fn maass_fd_evaluator(
    direction: Direction,
    u: &SmoothEvaluator,
    k: Complex64,
    h: f64,
) -> SmoothEvaluator {
    let u = u.clone();
    SmoothEvaluator::new(move |z| maass_fd(direction, &u, k, z, h))
}

/// `Δ_k u` as a new evaluator.
pub fn laplacian_fd_evaluator(u: &SmoothEvaluator, k: Complex64, h: f64) -> SmoothEvaluator {
    let u = u.clone();
    SmoothEvaluator::new(move |z| laplacian_fd(&u, k, z, h))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    #[serde(rename = "W")]
    Wtilde,
    #[serde(rename = "M")]
    Mtilde,
}

/// `z ↦ F̃_{εk/2, ν}(4π|n| y / l) e^{2πi n x / l}` with `F̃ ∈ {W̃, M̃}` and `ε = sign(n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisTerm {
    pub n: f64,
    pub width: f64,
    pub nu: Complex64,
    pub k: Complex64,
    pub family: Family,
}

impl BasisTerm {
    pub fn new(n: f64, width: f64, nu: Complex64, k: Complex64, family: Family) -> Result<Self> {
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Condition(format!(
                "basis terms need a nonzero frequency, got n = {n}"
            )));
        }
        if width.is_nan() || width <= 0.0 {
            return Err(Error::Condition(format!(
                "cusp width must be positive, got {width}"
            )));
        }
        Ok(BasisTerm {
            n,
            width,
            nu,
            k,
            family,
        })
    }

    pub fn sign(&self) -> f64 {
        self.n.signum()
    }

    pub fn scale(&self) -> f64 {
        4.0 * PI * self.n.abs() / self.width
    }

    /// First Whittaker index `εk/2`.
    pub fn kappa(&self) -> Complex64 {
        self.sign() * self.k / 2.0
    }

    /// `λ = 1/4 - ν²`
    pub fn eigenvalue(&self) -> Complex64 {
        0.25 - self.nu * self.nu
    }

    pub fn params(&self) -> WhittakerParams {
        WhittakerParams::new(self.kappa(), self.nu)
    }

    pub fn eval(&self, z: UHPoint) -> Result<Complex64> {
        let arg = self.scale() * z.y;
        let radial = match self.family {
            Family::Wtilde => normalized_w(self.params(), arg)?.value,
            Family::Mtilde => normalized_m(self.params(), arg)?.value,
        };
        Ok(radial * (2.0 * PI * Complex64::i() * self.n * z.x / self.width).exp())
    }

    pub fn evaluator(&self) -> SmoothEvaluator {
        let t = *self;
        SmoothEvaluator::new(move |z| t.eval(z))
            .with_weight(self.k)
            .with_eigenvalue(self.eigenvalue())
    }
}

fn m_prefactor_ok(kappa: Complex64, nu: Complex64) -> bool {
    rgamma(0.5 + nu - kappa).norm() != 0.0
}

/// The exact action of `E±_k` on a basis term: returns the weight-shifted term and the scalar.
pub fn maass_on_basis(t: &BasisTerm, direction: Direction) -> Result<(BasisTerm, Complex64)> {
    maass_on_basis_with(t, direction, false)
}

/// As [`maass_on_basis`]; `perturb` flips the sign of the `W̃`, `n > 0`, raising factor.
#[doc(hidden)]
pub fn maass_on_basis_with(
    t: &BasisTerm,
    direction: Direction,
    perturb: bool,
) -> Result<(BasisTerm, Complex64)> {
    let k = t.k;
    let lambda = t.eigenvalue();
    let shifted_k = match direction {
        Direction::Up => k + 2.0,
        Direction::Down => k - 2.0,
    };
    let target = BasisTerm { k: shifted_k, ..*t };
    let positive = t.n > 0.0;
    let two = Complex64::new(2.0, 0.0);
    let factor = match (t.family, positive, direction) {
        (Family::Wtilde, true, Direction::Up) => {
            if perturb {
                two
            } else {
                -two
            }
        }
        (Family::Wtilde, true, Direction::Down) => k * (k - 2.0) / 2.0 + 2.0 * lambda,
        (Family::Wtilde, false, Direction::Up) => k * (k + 2.0) / 2.0 + 2.0 * lambda,
        (Family::Wtilde, false, Direction::Down) => -two,
        (Family::Mtilde, true, Direction::Up) => -(k * (k + 2.0) / 2.0 + 2.0 * lambda),
        (Family::Mtilde, true, Direction::Down) => two,
        (Family::Mtilde, false, Direction::Up) => two,
        (Family::Mtilde, false, Direction::Down) => -(k * (k - 2.0) / 2.0 + 2.0 * lambda),
    };
    if t.family == Family::Mtilde {
        for term in [t, &target] {
            if !m_prefactor_ok(term.kappa(), term.nu) {
                return Err(Error::Condition(format!(
                    "M̃ rule needs 1/2+ν-εk/2 off the poles of Gamma (k ± ν ∉ 1/2+ℤ); fails at k={}, ν={}",
                    term.k, term.nu
                )));
            }
        }
    }
    debug_assert_eq!(target.nu, t.nu);
    debug_assert_eq!(target.k - t.k, shifted_k - k);
    Ok((target, factor))
}

fn max_over<F>(sample: &[UHPoint], f: F) -> Result<f64>
where
    F: Fn(UHPoint) -> Result<f64>,
{
    let mut m: f64 = 0.0;
    for &z in sample {
        m = m.max(f(z)?);
    }
    Ok(m)
}

/// Residuals of `Δ_k = -¼E+_{k-2}E-_k - k(k-2)/4` and `Δ_k = -¼E-_{k+2}E+_k - k(k+2)/4`,
/// maximized over `sample`.
pub fn verify_factorization(
    u: &SmoothEvaluator,
    k: Complex64,
    sample: &[UHPoint],
    h: f64,
) -> Result<(f64, f64)> {
    let down = maass_fd_evaluator(Direction::Down, u, k, h);
    let up = maass_fd_evaluator(Direction::Up, u, k, h);
    let r1 = max_over(sample, |z| {
        let lap = laplacian_fd(u, k, z, h)?;
        let rhs = -0.25 * maass_fd(Direction::Up, &down, k - 2.0, z, h)?
            - k * (k - 2.0) / 4.0 * u.eval(z)?;
        Ok((lap - rhs).norm())
    })?;
    let r2 = max_over(sample, |z| {
        let lap = laplacian_fd(u, k, z, h)?;
        let rhs = -0.25 * maass_fd(Direction::Down, &up, k + 2.0, z, h)?
            - k * (k + 2.0) / 4.0 * u.eval(z)?;
        Ok((lap - rhs).norm())
    })?;
    Ok((r1, r2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlashResiduals {
    pub laplacian: f64,
    pub up: f64,
    pub down: f64,
}

/// Residuals of `Δ_k(u|_k g) = (Δ_k u)|_k g` and `E±_k(u|_k g) = (E±_k u)|_{k±2} g`.
pub fn verify_slash_commutation(
    u: &SmoothEvaluator,
    k: Complex64,
    g: &GroupElement,
    sample: &[UHPoint],
    h: f64,
) -> Result<SlashResiduals> {
    let ug = u.slashed(k, g.clone());
    let lap_then = laplacian_fd_evaluator(u, k, h).slashed(k, g.clone());
    let up_then = maass_fd_evaluator(Direction::Up, u, k, h).slashed(k + 2.0, g.clone());
    let down_then = maass_fd_evaluator(Direction::Down, u, k, h).slashed(k - 2.0, g.clone());
    let laplacian = max_over(sample, |z| {
        Ok((laplacian_fd(&ug, k, z, h)? - lap_then.eval(z)?).norm())
    })?;
    let up = max_over(sample, |z| {
        Ok((maass_fd(Direction::Up, &ug, k, z, h)? - up_then.eval(z)?).norm())
    })?;
    let down = max_over(sample, |z| {
        Ok((maass_fd(Direction::Down, &ug, k, z, h)? - down_then.eval(z)?).norm())
    })?;
    Ok(SlashResiduals {
        laplacian,
        up,
        down,
    })
}

/// A residual at steps `h` and `h/2` and their ratio (≈ 4 for second-order error).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Richardson {
    pub h: f64,
    pub residual: f64,
    pub residual_half: f64,
    pub ratio: f64,
}

impl Richardson {
    /// Error constant `C` in `residual ≈ C h²`.
    pub fn constant(&self) -> f64 {
        self.residual / (self.h * self.h)
    }
}

pub fn richardson<F>(h: f64, residual: F) -> Result<Richardson>
where
    F: Fn(f64) -> Result<f64>,
{
    let r1 = residual(h)?;
    let r2 = residual(h / 2.0)?;
    Ok(Richardson {
        h,
        residual: r1,
        residual_half: r2,
        ratio: r1 / r2,
    })
}

/// One Richardson step on an `O(h²)` difference quotient: `(4 f(h/2) - f(h)) / 3`.
pub fn extrapolated<F>(h: f64, f: F) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    Ok((4.0 * f(h / 2.0)? - f(h)?) / 3.0)
}
