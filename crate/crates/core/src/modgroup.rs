//! The modular group SL(2, Z), its action on the upper half-plane and on
//! the boundary, the argument convention and the weight-k slash action.

use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A function on the upper half-plane. Evaluation may fail (for example when
/// a special function cannot be evaluated to the requested accuracy).
pub type HFn = Arc<dyn Fn(UHPoint) -> Result<Complex64> + Send + Sync>;

/// An integer 2x2 matrix of determinant 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

/// Letters used to spell elements of SL(2, Z). `S^{-1}` is never needed
/// because `S^{-1} = S^3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    S,
    T,
    TInv,
}

impl Letter {
    pub fn matrix(self) -> GroupElement {
        match self {
            Letter::S => GroupElement::s(),
            Letter::T => GroupElement::t(),
            Letter::TInv => GroupElement::t_pow(-1),
        }
    }
}

impl GroupElement {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if &a * &d - &b * &c != BigInt::one() {
            return Err(Error::NotUnimodular {
                a: a.to_string(),
                b: b.to_string(),
                c: c.to_string(),
                d: d.to_string(),
            });
        }
        Ok(Self { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    fn raw(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn identity() -> Self {
        Self::raw(1, 0, 0, 1)
    }

    pub fn neg_identity() -> Self {
        Self::raw(-1, 0, 0, -1)
    }

    /// `S = [[0, -1], [1, 0]]`.
    pub fn s() -> Self {
        Self::raw(0, -1, 1, 0)
    }

    /// `T = [[1, 1], [0, 1]]`.
    pub fn t() -> Self {
        Self::raw(1, 1, 0, 1)
    }

    pub fn t_pow(n: i64) -> Self {
        Self::raw(1, n, 0, 1)
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn entries_f64(&self) -> [f64; 4] {
        [
            big_to_f64(&self.a),
            big_to_f64(&self.b),
            big_to_f64(&self.c),
            big_to_f64(&self.d),
        ]
    }

    pub fn entries_i64(&self) -> Option<[i64; 4]> {
        Some([
            self.a.to_i64()?,
            self.b.to_i64()?,
            self.c.to_i64()?,
            self.d.to_i64()?,
        ])
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            a: -&self.a,
            b: -&self.b,
            c: -&self.c,
            d: -&self.d,
        }
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            e >>= 1;
        }
        acc
    }

    /// `a^2 + b^2 + c^2 + d^2`.
    pub fn norm_sq(&self) -> f64 {
        let [a, b, c, d] = self.entries_f64();
        a * a + b * b + c * c + d * d
    }

    /// `c z + d`.
    pub fn denominator_at(&self, z: UHPoint) -> Complex64 {
        let [_, _, c, d] = self.entries_f64();
        Complex64::new(c * z.x + d, c * z.y)
    }

    /// Spells the element as a word in `S`, `T`, `T^{-1}`; the product of the
    /// letters equals `self` exactly.
    pub fn word(&self) -> Vec<Letter> {
        let mut letters = Vec::new();
        let (mut a, mut b, mut c, mut d) = (
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
        );
        while !c.is_zero() {
            // nearest-integer quotient keeps |a - q c| <= |c| / 2
            let two = BigInt::from(2);
            let q = (&two * &a + &c).div_floor(&(&two * &c));
            a -= &q * &c;
            b -= &q * &d;
            push_t_power(&mut letters, &q);
            // M <- S^{-1} M
            let (na, nb, nc, nd) = (c.clone(), d.clone(), -a, -b);
            a = na;
            b = nb;
            c = nc;
            d = nd;
            letters.push(Letter::S);
        }
        if a.is_negative() {
            // -T^{-b} = S^2 T^{-b}
            letters.push(Letter::S);
            letters.push(Letter::S);
            push_t_power(&mut letters, &(-b));
        } else {
            push_t_power(&mut letters, &b);
        }
        letters
    }

    pub fn from_word(word: &[Letter]) -> Self {
        word.iter()
            .fold(Self::identity(), |acc, l| &acc * &l.matrix())
    }
}

fn push_t_power(letters: &mut Vec<Letter>, q: &BigInt) {
    let n = q.to_i64().expect("translation exponent exceeds i64 range");
    let letter = if n >= 0 { Letter::T } else { Letter::TInv };
    letters.extend(std::iter::repeat_n(letter, n.unsigned_abs() as usize));
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl Mul for &GroupElement {
    type Output = GroupElement;

    fn mul(self, o: &GroupElement) -> GroupElement {
        GroupElement {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, o: GroupElement) -> GroupElement {
        &self * &o
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// The generators `S` and `T` of the full modular group.
pub fn generators() -> (GroupElement, GroupElement) {
    (GroupElement::s(), GroupElement::t())
}

/// A point `x + iy` with `y > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UHPoint {
    pub x: f64,
    pub y: f64,
}

impl UHPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if y.is_nan() || y <= 0.0 || !x.is_finite() || !y.is_finite() {
            return Err(Error::NotInUpperHalfPlane { x, y });
        }
        Ok(Self { x, y })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

impl fmt::Display for UHPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}i", self.x, self.y)
    }
}

/// A point of the boundary `Q ∪ {∞}`. Rationals are kept in lowest terms
/// with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryPoint {
    Infinity,
    Rational(BigRational),
}

impl BoundaryPoint {
    pub fn rational(num: i64, den: i64) -> Self {
        if den == 0 {
            return Self::Infinity;
        }
        Self::Rational(BigRational::new(num.into(), den.into()))
    }

    /// Image of `∞` under `g`.
    pub fn cusp_of(g: &GroupElement) -> Self {
        apply_moebius_boundary(g, &BoundaryPoint::Infinity)
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Infinity => write!(f, "inf"),
            BoundaryPoint::Rational(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            BoundaryPoint::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

/// `(az + b) / (cz + d)`; the imaginary part is computed as `y / |cz + d|^2`.
pub fn apply_moebius(g: &GroupElement, z: UHPoint) -> UHPoint {
    let [a, b, _, _] = g.entries_f64();
    let den = g.denominator_at(z);
    let num = Complex64::new(a * z.x + b, a * z.y);
    let n2 = den.norm_sqr();
    UHPoint {
        x: (num * den.conj()).re / n2,
        y: z.y / n2,
    }
}

pub fn apply_moebius_boundary(g: &GroupElement, q: &BoundaryPoint) -> BoundaryPoint {
    match q {
        BoundaryPoint::Infinity => {
            if g.c.is_zero() {
                BoundaryPoint::Infinity
            } else {
                BoundaryPoint::Rational(BigRational::new(g.a.clone(), g.c.clone()))
            }
        }
        BoundaryPoint::Rational(r) => {
            let (p, s) = (r.numer(), r.denom());
            // (a p/s + b) / (c p/s + d) = (a p + b s) / (c p + d s)
            let num = &g.a * p + &g.b * s;
            let den = &g.c * p + &g.d * s;
            if den.is_zero() {
                BoundaryPoint::Infinity
            } else {
                BoundaryPoint::Rational(BigRational::new(num, den))
            }
        }
    }
}

/// Argument in `(-π, π]`.
pub fn arg(w: Complex64) -> f64 {
    let t = w.im.atan2(w.re);
    if t <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        t
    }
}

/// `e^{i k arg(cz + d)}`.
pub fn automorphy_phase(g: &GroupElement, z: UHPoint, k: Complex64) -> Complex64 {
    (Complex64::i() * k * arg(g.denominator_at(z))).exp()
}

/// `(f|_k g)(z) = e^{-ik arg(cz+d)} f(gz)`.
pub fn slash(f: HFn, k: Complex64, g: GroupElement) -> HFn {
    Arc::new(move |z| {
        let fz = f(apply_moebius(&g, z))?;
        Ok(fz / automorphy_phase(&g, z, k))
    })
}

/// `γ` with `γz` in the closed standard fundamental domain `|x| ≤ 1/2`, `|z| ≥ 1`.
pub fn reduce_to_fundamental_domain(z: UHPoint) -> (GroupElement, UHPoint) {
    let mut g = GroupElement::identity();
    let mut w = z;
    // each S step at least doubles the height once w has been translated
    for _ in 0..10_000 {
        let n = w.x.round();
        if n != 0.0 {
            let t = GroupElement::t_pow(-(n as i64));
            g = &t * &g;
            w = apply_moebius(&t, w);
        }
        if w.x * w.x + w.y * w.y >= 1.0 - 1e-15 {
            break;
        }
        g = &GroupElement::s() * &g;
        w = apply_moebius(&GroupElement::s(), w);
    }
    (g.clone(), apply_moebius(&g, z))
}

/// Parses a word such as `"S T T^-1 S"` or `"STtS"` (`t` = `T^{-1}`).
pub fn parse_word(text: &str) -> Result<GroupElement> {
    let cleaned: String = text
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '*')
        .collect();
    let mut out = GroupElement::identity();
    let mut chars = cleaned.chars().peekable();
    while let Some(ch) = chars.next() {
        let letter = match ch {
            'S' => GroupElement::s(),
            'T' => GroupElement::t(),
            't' => GroupElement::t_pow(-1),
            'I' => GroupElement::identity(),
            _ => return Err(Error::InvalidSpec(format!("unknown letter '{ch}' in word"))),
        };
        let mut exponent = 1i64;
        if chars.peek() == Some(&'^') {
            chars.next();
            let mut digits = String::new();
            while let Some(&c) = chars.peek() {
                if c == '-' || c.is_ascii_digit() {
                    digits.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            exponent = digits
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad exponent '{digits}'")))?;
        }
        out = &out * &letter.pow(exponent);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn reduction_lands_in_the_fundamental_domain() {
        for (x, y) in [
            (0.3, 1e-3),
            (-7.4, 0.02),
            (0.49, 0.9),
            (0.1, 3.0),
            (12.25, 0.5),
        ] {
            let z = UHPoint { x, y };
            let (g, w) = reduce_to_fundamental_domain(z);
            assert!(
                w.x.abs() <= 0.5 + 1e-12 && w.x * w.x + w.y * w.y >= 1.0 - 1e-12,
                "{w:?}"
            );
            let direct = apply_moebius(&g, z);
            assert!((direct.x - w.x).abs() < 1e-12 && (direct.y - w.y).abs() < 1e-12);
        }
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn rejects_bad_matrices_and_points() {
        assert!(GroupElement::from_i64(1, 1, 1, 1).is_err());
        assert!(UHPoint::new(0.0, 0.0).is_err());
        assert!(UHPoint::new(0.0, -1.0).is_err());
    }

    #[test]
    fn moebius_examples() {
        let i = UHPoint::new(0.0, 1.0).unwrap();
        let si = apply_moebius(&GroupElement::s(), i);
        assert!((si.x).abs() < 1e-15 && (si.y - 1.0).abs() < 1e-15);

        let z = UHPoint::new(0.3, 2.0).unwrap();
        let tz = apply_moebius(&GroupElement::t(), z);
        assert!((tz.x - 1.3).abs() < 1e-15 && (tz.y - 2.0).abs() < 1e-15);

        let w = apply_moebius(&GroupElement::s(), UHPoint::new(0.0, 2.0).unwrap());
        assert!(w.x.abs() < 1e-15 && (w.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_examples() {
        let (s, t) = generators();
        assert_eq!(
            apply_moebius_boundary(&t, &BoundaryPoint::Infinity),
            BoundaryPoint::Infinity
        );
        assert_eq!(
            apply_moebius_boundary(&s, &BoundaryPoint::rational(0, 1)),
            BoundaryPoint::Infinity
        );
        assert_eq!(
            apply_moebius_boundary(&s, &BoundaryPoint::Infinity),
            BoundaryPoint::rational(0, 1)
        );
        // limit oracle: S(iε) = i/ε escapes to ∞
        let eps = 1e-9;
        let w = apply_moebius(&s, UHPoint::new(0.0, eps).unwrap());
        assert!(w.y > 1e8);
    }

    #[test]
    fn boundary_rationals_are_canonical() {
        let q = BoundaryPoint::rational(2, -4);
        assert_eq!(q.to_string(), "-1/2");
    }

    #[test]
    fn phase_examples() {
        let z = UHPoint::new(0.4, 0.7).unwrap();
        let k = Complex64::new(0.37, -0.2);
        assert!(close(
            automorphy_phase(&GroupElement::identity(), z, k),
            Complex64::new(1.0, 0.0),
            1e-15
        ));
        let expected = (Complex64::i() * k * PI).exp();
        assert!(close(
            automorphy_phase(&GroupElement::neg_identity(), z, k),
            expected,
            1e-15
        ));
        let i = UHPoint::new(0.0, 1.0).unwrap();
        let expected = (Complex64::i() * k * PI / 2.0).exp();
        assert!(close(
            automorphy_phase(&GroupElement::s(), i, k),
            expected,
            1e-15
        ));
    }

    #[test]
    fn arg_maps_negative_axis_to_pi() {
        assert_eq!(arg(Complex64::new(-1.0, -0.0)), PI);
        assert_eq!(arg(Complex64::new(-1.0, 0.0)), PI);
    }

    #[test]
    fn generator_relations() {
        let (s, t) = generators();
        assert_eq!(&s * &s, GroupElement::neg_identity());
        let st = &s * &t;
        assert_eq!(st.pow(3), GroupElement::neg_identity());
    }

    #[test]
    fn slash_examples() {
        let k = Complex64::new(0.5, 0.1);
        let f: HFn = Arc::new(|z: UHPoint| Ok(Complex64::new(z.x, z.y * z.y)));
        let z = UHPoint::new(0.2, 0.9).unwrap();
        let g = slash(f.clone(), k, GroupElement::identity());
        assert_eq!(g(z).unwrap(), f(z).unwrap());

        let one: HFn = Arc::new(|_| Ok(Complex64::new(1.0, 0.0)));
        let g = slash(
            one,
            Complex64::new(0.0, 0.0),
            GroupElement::from_i64(2, 1, 7, 4).unwrap(),
        );
        assert!(close(g(z).unwrap(), Complex64::new(1.0, 0.0), 1e-15));

        let s_pow = Complex64::new(0.5, 1.3);
        let pw: HFn = Arc::new(move |z: UHPoint| Ok(Complex64::new(z.y, 0.0).powc(s_pow)));
        let g = slash(pw, Complex64::new(0.0, 0.0), GroupElement::s());
        let i = UHPoint::new(0.0, 1.0).unwrap();
        assert!(close(g(i).unwrap(), Complex64::new(1.0, 0.0), 1e-14));
    }

    #[test]
    fn words_spell_the_element() {
        for (a, b, c, d) in [
            (1, 0, 0, 1),
            (-1, 0, 0, -1),
            (2, 1, 7, 4),
            (5, -3, -8, 5),
            (0, -1, 1, 0),
            (-13, -8, 5, 3),
        ] {
            let g = GroupElement::from_i64(a, b, c, d).unwrap();
            assert_eq!(GroupElement::from_word(&g.word()), g, "{g}");
        }
    }

    #[test]
    fn parse_words() {
        assert_eq!(parse_word("S S").unwrap(), GroupElement::neg_identity());
        assert_eq!(parse_word("T^3").unwrap(), GroupElement::t_pow(3));
        assert_eq!(
            parse_word("T^-2 S").unwrap(),
            &GroupElement::t_pow(-2) * &GroupElement::s()
        );
        assert!(parse_word("X").is_err());
    }
}
