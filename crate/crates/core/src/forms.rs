//! Generalized Maass forms as evaluators: Fourier–Whittaker expansions at a cusp, lifts of
//! holomorphic forms, truncated Eisenstein and Poincaré series with certified tail bounds,
//! and sampled checks of the transformation law and of moderate growth.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modgroup::{
    apply_moebius, arg, automorphy_phase, reduce_to_fundamental_domain, slash, GroupElement, HFn,
    UHPoint,
};
use crate::multiplier::MultiplierSystem;
use crate::operators::{BasisTerm, Family, SmoothEvaluator};
use crate::subgroup::{cusps, lift_bottom_row, CongruenceSubgroup, CosetTable, CuspData};
use crate::whittaker::{gamma_complex, normalized_m, normalized_w, rgamma, w_asymptote};

type C = Complex64;

fn y_pow(y: f64, s: C) -> C {
    (s * y.ln()).exp()
}

fn e(t: C) -> C {
    (2.0 * PI * C::i() * t).exp()
}

/// How a form was produced. Lifts use the root `ν = (k-1)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Expansion,
    Lift,
    Eisenstein,
    Poincare,
}

/// A function `u` with `u|_k γ = v(γ)u` for `γ ∈ Γ` and `Δ_k u = (1/4 - ν²)u`.
#[derive(Clone, Debug)]
pub struct GeneralizedMaassForm {
    pub group: CongruenceSubgroup,
    pub weight: C,
    pub multiplier: Arc<MultiplierSystem>,
    pub nu: C,
    pub evaluator: SmoothEvaluator,
    pub provenance: Provenance,
}

impl GeneralizedMaassForm {
    /// Group and weight are taken from the multiplier.
    pub fn new(
        multiplier: Arc<MultiplierSystem>,
        nu: C,
        evaluator: SmoothEvaluator,
        provenance: Provenance,
    ) -> Self {
        let weight = multiplier.weight();
        GeneralizedMaassForm {
            group: multiplier.group(),
            weight,
            nu,
            evaluator: evaluator
                .with_weight(weight)
                .with_eigenvalue(0.25 - nu * nu),
            multiplier,
            provenance,
        }
    }

    pub fn eigenvalue(&self) -> C {
        0.25 - self.nu * self.nu
    }

    pub fn eval(&self, z: UHPoint) -> Result<C> {
        self.evaluator.eval(z)
    }

    /// The same function regarded as a form on a subgroup.
    pub fn restrict(&self, sub: CongruenceSubgroup) -> Result<Self> {
        let v = Arc::new(self.multiplier.restrict(sub)?);
        Ok(GeneralizedMaassForm::new(
            v,
            self.nu,
            self.evaluator.clone(),
            self.provenance,
        ))
    }
}

/// `κ ∈ [0, 1)` with `w = e^{2πiκ}`; `|w|` must be 1.
pub fn kappa_from_value(w: C) -> Result<f64> {
    if (w.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidMultiplier(format!(
            "|v(γ_q)| = {} is not 1, the multiplier is not weakly parabolic here",
            w.norm()
        )));
    }
    let k = (arg(w) / (2.0 * PI)).rem_euclid(1.0);
    Ok(if k > 1.0 - 1e-14 { 0.0 } else { k })
}

pub fn kappa_from_multiplier(v: &MultiplierSystem, q: &CuspData) -> Result<f64> {
    kappa_from_value(v.evaluate(&q.stabilizer)?)
}

/// A left-finite expansion `Σ_m a_m e^{2πi(offset + m + κ)z/l}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QExpansion {
    pub width: f64,
    pub kappa: f64,
    pub offset: i64,
    pub coefficients: Vec<C>,
}

impl QExpansion {
    pub fn new(width: f64, kappa: f64, offset: i64, coefficients: Vec<C>) -> Result<Self> {
        if width.is_nan() || width <= 0.0 || !(0.0..1.0).contains(&kappa) {
            return Err(Error::InvalidSpec(format!(
                "bad q-expansion data: width {width}, κ {kappa}"
            )));
        }
        Ok(QExpansion {
            width,
            kappa,
            offset,
            coefficients,
        })
    }

    pub fn one() -> Self {
        QExpansion {
            width: 1.0,
            kappa: 0.0,
            offset: 0,
            coefficients: vec![C::new(1.0, 0.0)],
        }
    }

    /// `Δ = q ∏ (1 - q^n)^24` through `q^terms`.
    pub fn discriminant(terms: usize) -> Self {
        let mut p = vec![0i128; terms];
        p[0] = 1;
        for n in 1..terms {
            for _ in 0..24 {
                for j in (n..terms).rev() {
                    p[j] -= p[j - n];
                }
            }
        }
        QExpansion {
            width: 1.0,
            kappa: 0.0,
            offset: 1,
            coefficients: p.into_iter().map(|t| C::new(t as f64, 0.0)).collect(),
        }
    }

    /// Normalized `E_k = 1 - (2k/B_k) Σ σ_{k-1}(n) q^n` through `q^terms`.
    pub fn eisenstein(k: u32, terms: usize) -> Result<Self> {
        let c = match k {
            4 => 240.0,
            6 => -504.0,
            8 => 480.0,
            10 => -264.0,
            12 => 65520.0 / 691.0,
            14 => -24.0,
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "no Eisenstein series tabulated for weight {k}"
                )))
            }
        };
        let mut coefficients = vec![C::new(1.0, 0.0)];
        for n in 1..=terms as u64 {
            let sigma: f64 = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| (d as f64).powi(k as i32 - 1))
                .sum();
            coefficients.push(C::new(c * sigma, 0.0));
        }
        Ok(QExpansion {
            width: 1.0,
            kappa: 0.0,
            offset: 0,
            coefficients,
        })
    }

    pub fn eval(&self, z: UHPoint) -> C {
        let w = z.to_complex() / self.width;
        let q = e(w);
        let mut qm = e((self.offset as f64 + self.kappa) * w);
        let mut sum = C::new(0.0, 0.0);
        for a in &self.coefficients {
            sum += a * qm;
            qm *= q;
        }
        sum
    }

    /// `sup |F|` over the upper half-plane when every exponent is non-negative.
    pub fn sup_bound(&self) -> Option<f64> {
        if self.offset < 0 {
            return None;
        }
        Some(self.coefficients.iter().map(|a| a.norm()).sum())
    }
}

/// `u(z) = Im(z)^{k/2} F(z)`, an eigenfunction with `λ = (k/2)(1 - k/2)`.
pub fn lift_holomorphic(
    f: QExpansion,
    k: C,
    v: Arc<MultiplierSystem>,
) -> Result<GeneralizedMaassForm> {
    if (v.weight() - k).norm() > 1e-12 {
        return Err(Error::InvalidSpec(format!(
            "multiplier weight {} differs from k = {k}",
            v.weight()
        )));
    }
    let raw = move |z: UHPoint| y_pow(z.y, k / 2.0) * f.eval(z);
    // on the full group the series only ever needs to be summed above height √3/2
    let eval = if v.group() == CongruenceSubgroup::full() {
        let v = Arc::clone(&v);
        SmoothEvaluator::new(move |z| {
            let (g, w) = reduce_to_fundamental_domain(z);
            if g.is_identity() {
                return Ok(raw(z));
            }
            Ok(raw(w) / (v.evaluate(&g)? * automorphy_phase(&g, z, k)))
        })
    } else {
        SmoothEvaluator::new(move |z| Ok(raw(z)))
    };
    Ok(GeneralizedMaassForm::new(
        v,
        (k - 1.0) / 2.0,
        eval,
        Provenance::Lift,
    ))
}

fn frequency_ok(n: f64, kappa: f64) -> bool {
    let t = n - kappa;
    (t - t.round()).abs() < 1e-9
}

/// The expansion of `u_q = u|_k g_q` at a cusp: `W̃` terms, finitely many `M̃` terms and the
/// zero mode `C₊ y^{1/2+ν} + C₋ y^{1/2-ν}`.
#[derive(Clone, Debug)]
pub struct FourierWhittakerExpansion {
    pub cusp: CuspData,
    pub kappa: f64,
    pub nu: C,
    pub k: C,
    pub growth: f64,
    pub a: Vec<(f64, C)>,
    pub b: Vec<(f64, C)>,
    pub c_plus: C,
    pub c_minus: C,
    pub y_min: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansionValue {
    pub value: C,
    /// Bound on the omitted `W̃` terms from the leading asymptote.
    pub truncation_error: f64,
    /// Accumulated error estimates of the Whittaker evaluations.
    pub eval_error: f64,
    pub terms: usize,
}

impl FourierWhittakerExpansion {
    pub fn new(cusp: CuspData, kappa: f64, nu: C, k: C, growth: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::InvalidSpec(format!("κ = {kappa} is not in [0, 1)")));
        }
        Ok(FourierWhittakerExpansion {
            cusp,
            kappa,
            nu,
            k,
            growth,
            a: Vec::new(),
            b: Vec::new(),
            c_plus: C::new(0.0, 0.0),
            c_minus: C::new(0.0, 0.0),
            y_min: 0.3,
        })
    }

    fn width(&self) -> f64 {
        self.cusp.width as f64
    }

    fn check_frequency(&self, n: f64) -> Result<()> {
        if n == 0.0 || !frequency_ok(n, self.kappa) {
            return Err(Error::InvalidSpec(format!(
                "frequency {n} must be nonzero and congruent to κ = {} mod 1",
                self.kappa
            )));
        }
        Ok(())
    }

    pub fn with_a(mut self, n: f64, coef: C) -> Result<Self> {
        self.check_frequency(n)?;
        self.a.push((n, coef));
        Ok(self)
    }

    pub fn with_b(mut self, n: f64, coef: C) -> Result<Self> {
        self.check_frequency(n)?;
        if 2.0 * PI * n.abs() / self.width() >= self.growth {
            return Err(Error::InvalidSpec(format!(
                "M̃ term at n = {n} violates 2π|n|/l < M = {}",
                self.growth
            )));
        }
        self.b.push((n, coef));
        Ok(self)
    }

    /// Zero mode; only allowed when `κ = 0`.
    pub fn with_zero_mode(mut self, c_plus: C, c_minus: C) -> Result<Self> {
        if self.kappa != 0.0 && (c_plus.norm() != 0.0 || c_minus.norm() != 0.0) {
            return Err(Error::InvalidSpec(format!(
                "zero-mode coefficients must vanish for κ = {} ∉ ℤ",
                self.kappa
            )));
        }
        self.c_plus = c_plus;
        self.c_minus = c_minus;
        Ok(self)
    }

    pub fn with_y_min(mut self, y_min: f64) -> Self {
        self.y_min = y_min;
        self
    }

    /// Smallest `N` with `e^{-2πNy/l} < 1e-12`.
    pub fn default_truncation(&self, y: f64) -> u64 {
        (12.0 * 10f64.ln() * self.width() / (2.0 * PI * y))
            .ceil()
            .max(1.0) as u64
    }

    /// `u_q(z)` with the `W̃` terms restricted to `|n| ≤ N`.
    pub fn eval(&self, z: UHPoint, n_trunc: Option<u64>) -> Result<ExpansionValue> {
        if z.y < self.y_min {
            return Err(Error::Condition(format!(
                "y = {} lies below the cusp neighbourhood y ≥ {}",
                z.y, self.y_min
            )));
        }
        let l = self.width();
        let n_max = n_trunc.unwrap_or_else(|| self.default_truncation(z.y)) as f64;
        let mut out = ExpansionValue {
            value: C::new(0.0, 0.0),
            truncation_error: 0.0,
            eval_error: 0.0,
            terms: 0,
        };
        for &(n, coef) in &self.a {
            let t = BasisTerm::new(n, l, self.nu, self.k, Family::Wtilde)?;
            let norm = coef.norm() / n.abs().sqrt();
            if n.abs() > n_max + 1e-9 {
                out.truncation_error +=
                    2.0 * norm * w_asymptote(t.params(), t.scale() * z.y).norm();
                continue;
            }
            let r = normalized_w(t.params(), t.scale() * z.y)
                .map_err(|e| e.in_term(format!("A[{n}]")))?;
            out.value += coef / n.abs().sqrt() * r.value * e(C::from(n * z.x / l));
            out.eval_error += norm * r.abs_error_estimate;
            out.terms += 1;
        }
        for &(n, coef) in &self.b {
            let t = BasisTerm::new(n, l, self.nu, self.k, Family::Mtilde)?;
            let r = normalized_m(t.params(), t.scale() * z.y)
                .map_err(|e| e.in_term(format!("B[{n}]")))?;
            out.value += coef / n.abs().sqrt() * r.value * e(C::from(n * z.x / l));
            out.eval_error += coef.norm() / n.abs().sqrt() * r.abs_error_estimate;
            out.terms += 1;
        }
        if self.kappa == 0.0 {
            out.value +=
                self.c_plus * y_pow(z.y, 0.5 + self.nu) + self.c_minus * y_pow(z.y, 0.5 - self.nu);
        }
        Ok(out)
    }

    /// The form `u = u_q |_k g_q^{-1}` on `Γ`; `v` must match `k` and `κ`.
    pub fn to_form(&self, v: Arc<MultiplierSystem>) -> Result<GeneralizedMaassForm> {
        if (v.weight() - self.k).norm() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "multiplier weight {} differs from k = {}",
                v.weight(),
                self.k
            )));
        }
        let kv = kappa_from_multiplier(&v, &self.cusp)?;
        let gap = (kv - self.kappa).rem_euclid(1.0);
        if gap.min(1.0 - gap) > 1e-9 {
            return Err(Error::InvalidSpec(format!(
                "κ = {} but the multiplier gives κ = {kv}",
                self.kappa
            )));
        }
        let this = self.clone();
        let uq: HFn = Arc::new(move |z| Ok(this.eval(z, None)?.value));
        let eval = SmoothEvaluator::from_hfn(slash(uq, self.k, self.cusp.scaling.inverse()));
        Ok(GeneralizedMaassForm::new(
            v,
            self.nu,
            eval,
            Provenance::Expansion,
        ))
    }
}

/// JSON form of an expansion; frequencies are string keys.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionSpec {
    pub cusp_index: usize,
    pub kappa: f64,
    pub nu: [f64; 2],
    pub k: [f64; 2],
    #[serde(rename = "A", default)]
    pub a: BTreeMap<String, [f64; 2]>,
    #[serde(rename = "B", default)]
    pub b: BTreeMap<String, [f64; 2]>,
    #[serde(rename = "C_plus", default)]
    pub c_plus: [f64; 2],
    #[serde(rename = "C_minus", default)]
    pub c_minus: [f64; 2],
    #[serde(rename = "M", default)]
    pub growth: f64,
}

fn cplx(p: [f64; 2]) -> C {
    C::new(p[0], p[1])
}

fn parse_freq(key: &str) -> Result<f64> {
    key.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidSpec(format!("frequency key '{key}' is not a number")))
}

impl ExpansionSpec {
    pub fn build(&self, table: &CosetTable) -> Result<FourierWhittakerExpansion> {
        let cusp = cusps(table)?
            .into_iter()
            .nth(self.cusp_index)
            .ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "{} has no cusp #{}",
                    table.group(),
                    self.cusp_index
                ))
            })?;
        let mut ex = FourierWhittakerExpansion::new(
            cusp,
            self.kappa,
            cplx(self.nu),
            cplx(self.k),
            self.growth,
        )?;
        for (n, c) in &self.a {
            ex = ex.with_a(parse_freq(n)?, cplx(*c))?;
        }
        for (n, c) in &self.b {
            ex = ex.with_b(parse_freq(n)?, cplx(*c))?;
        }
        ex.with_zero_mode(cplx(self.c_plus), cplx(self.c_minus))
    }
}

// ---------------------------------------------------------------------------------------
// Series over Γ∞\Γ

/// Smallest `l > 0` with `T^l ∈ Γ`.
pub fn width_at_infinity(group: CongruenceSubgroup) -> u64 {
    (1..=group.level.max(1))
        .find(|&l| group.contains(&GroupElement::t_pow(l as i64)))
        .unwrap_or(group.level.max(1))
}

fn has_neg_identity(group: CongruenceSubgroup) -> bool {
    group.contains(&GroupElement::neg_identity())
}

/// One representative of `Γ∞\Γ` per admissible bottom row `(c, d)` with `c² + d² ≤ R²`,
/// sorted by `(c² + d², c, d)`. When `-I ∈ Γ` only one of `±(c, d)` is kept. The top row
/// is reduced so that `|ac + bd| ≤ l(c² + d²)/2`, hence `μ(γ) ≤ (2 + l²/4)(c² + d²)`.
pub fn cosets_at_infinity(group: CongruenceSubgroup, radius: f64) -> Result<Vec<GroupElement>> {
    let r = radius.floor() as i64;
    let l = width_at_infinity(group) as i64;
    let pm = has_neg_identity(group);
    let level = group.level.max(1) as i64;
    let mut rows = Vec::new();
    for c in (if pm { 0 } else { -r })..=r {
        for d in -r..=r {
            let n = c * c + d * d;
            if n == 0 || (n as f64) > radius * radius || c.gcd(&d) != 1 {
                continue;
            }
            if pm && (c < 0 || (c == 0 && d < 0)) {
                continue;
            }
            rows.push((n, c, d));
        }
    }
    rows.sort_unstable();
    let mut out = Vec::with_capacity(rows.len());
    for (n, c, d) in rows {
        let g0 = lift_bottom_row(&c.into(), &d.into())?;
        let Some(g) = (0..level)
            .map(|j| &GroupElement::t_pow(j) * &g0)
            .find(|g| group.contains(g))
        else {
            continue;
        };
        let [a, b, _, _] = g
            .entries_i64()
            .ok_or_else(|| Error::Internal("coset representative overflows i64".into()))?;
        let dot = a * c + b * d;
        let m = (-(dot as f64) / (l * n) as f64).round() as i64;
        out.push(GroupElement::from_i64(a + m * l * c, b + m * l * d, c, d)?);
    }
    Ok(out)
}

/// Sharp constant with `c² + d² ≤ C(z)|cz + d|²` for all real `(c, d)`: the inverse of the
/// smaller eigenvalue of `[[x² + y², x], [x, 1]]`.
pub fn pointwise_constant(z: UHPoint) -> f64 {
    let tr = z.x * z.x + z.y * z.y + 1.0;
    let disc = (tr * tr - 4.0 * z.y * z.y).max(0.0).sqrt();
    (tr + disc) / (2.0 * z.y * z.y)
}

/// Upper bound for `Σ r^{-p}` over integer points with `r = |(c, d)| > R` (`p > 2`),
/// from comparison with the integral over unit squares.
pub fn lattice_tail(p: f64, radius: f64) -> f64 {
    let t = radius - 2f64.sqrt();
    if p <= 2.0 || t <= 0.0 {
        return f64::INFINITY;
    }
    2.0 * PI * (t.powf(2.0 - p) / (p - 2.0) + t.powf(1.0 - p) / (2f64.sqrt() * (p - 1.0)))
}

/// Constants with `|v(γ)|^{-1} ≤ K μ(γ)^α` on the sampled representatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub alpha: f64,
    pub k_const: f64,
}

/// Heuristic `α`: twice the largest `log|v(γ)^{-1}| / log μ(γ)` over `Γ∞\Γ` representatives
/// with `c² + d² ≤ R²`; `K` then covers the same sample.
pub fn estimate_growth(v: &MultiplierSystem, radius: f64) -> Result<GrowthEstimate> {
    let reps = cosets_at_infinity(v.group(), radius)?;
    let mut data = Vec::with_capacity(reps.len());
    for g in &reps {
        data.push((g.norm_sq(), -v.evaluate(g)?.norm().ln()));
    }
    let ratio = data.iter().map(|(mu, lv)| lv / mu.ln()).fold(0.0, f64::max);
    let alpha = 2.0 * ratio;
    let k_const = data
        .iter()
        .map(|(mu, lv)| (lv - alpha * mu.ln()).exp())
        .fold(1.0, f64::max);
    Ok(GrowthEstimate { alpha, k_const })
}

/// The function summed over `Γ∞\Γ`.
#[derive(Clone, Debug)]
pub enum Seed {
    /// `Im(z)^{1/2+ν}` (weight 0).
    Power { nu: C },
    /// `Im(z)^{k/2} h(z)` with `h` bounded holomorphic.
    LiftedHolomorphic { h: QExpansion },
    /// `M̃_{k/2,ν}(4π|n| y) e^{2πinx}`.
    MTildeTerm { n: f64, nu: C },
}

#[derive(Clone, Debug)]
pub struct SeriesSpec {
    pub seed: Seed,
    pub multiplier: Arc<MultiplierSystem>,
    pub radius: f64,
    pub alpha: f64,
    pub k_const: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub radius: f64,
    pub value: C,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Radius of the sample used by the default growth estimate.
pub const GROWTH_SAMPLE_RADIUS: f64 = 20.0;

impl SeriesSpec {
    /// Growth constants default to [`estimate_growth`].
    pub fn new(seed: Seed, multiplier: Arc<MultiplierSystem>, radius: f64) -> Result<Self> {
        let g = estimate_growth(&multiplier, GROWTH_SAMPLE_RADIUS)?;
        let spec = SeriesSpec {
            seed,
            multiplier,
            radius,
            alpha: g.alpha,
            k_const: g.k_const,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_growth(mut self, alpha: f64, k_const: f64) -> Result<Self> {
        self.alpha = alpha;
        self.k_const = k_const;
        self.validate()?;
        Ok(self)
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        self.radius = radius;
        self.validate()?;
        Ok(self)
    }

    pub fn weight(&self) -> C {
        self.multiplier.weight()
    }

    pub fn nu(&self) -> C {
        match &self.seed {
            Seed::Power { nu } | Seed::MTildeTerm { nu, .. } => *nu,
            Seed::LiftedHolomorphic { .. } => (self.weight() - 1.0) / 2.0,
        }
    }

    /// `|F(w)| ≤ B Im(w)^σ`.
    fn sigma(&self) -> f64 {
        match &self.seed {
            Seed::Power { nu } | Seed::MTildeTerm { nu, .. } => 0.5 + nu.re,
            Seed::LiftedHolomorphic { .. } => self.weight().re / 2.0,
        }
    }

    /// Decay exponent of the bound on the terms in `r = |(c, d)|`: `2σ - 2α`.
    pub fn term_exponent(&self) -> f64 {
        2.0 * self.sigma() - 2.0 * self.alpha
    }

    /// Decay exponent of the tail bound in `R`.
    pub fn tail_exponent(&self) -> f64 {
        self.term_exponent() - 2.0
    }

    fn validate(&self) -> Result<()> {
        if !(1.0..f64::INFINITY).contains(&self.radius) {
            return Err(Error::InvalidSpec(format!(
                "radius must be ≥ 1, got {}",
                self.radius
            )));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 || self.k_const.is_nan() || self.k_const <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "need α ≥ 0 and K > 0, got {} and {}",
                self.alpha, self.k_const
            )));
        }
        let k = self.weight();
        match &self.seed {
            Seed::Power { nu } => {
                if k.norm() > 1e-12 {
                    return Err(Error::InvalidSpec(format!(
                        "the power seed has weight 0, multiplier has {k}"
                    )));
                }
                if nu.re <= self.alpha + 0.5 {
                    return Err(Error::Condition(format!(
                        "Eisenstein series converges only for Re ν > α + 1/2 = {}, got ν = {nu}",
                        self.alpha + 0.5
                    )));
                }
            }
            Seed::LiftedHolomorphic { h } => {
                if h.sup_bound().is_none() {
                    return Err(Error::InvalidSpec(
                        "the holomorphic seed must be bounded".into(),
                    ));
                }
                if k.re <= 2.0 * self.alpha + 2.0 {
                    return Err(Error::Condition(format!(
                        "Poincaré series converges only for k > 2α + 2 = {}, got k = {k}",
                        2.0 * self.alpha + 2.0
                    )));
                }
            }
            Seed::MTildeTerm { n, nu } => {
                if *n == 0.0 {
                    return Err(Error::InvalidSpec("M̃ seed needs n ≠ 0".into()));
                }
                if nu.re <= self.alpha + 0.5 {
                    return Err(Error::Condition(format!(
                        "M̃ Poincaré series converges only for Re ν > α + 1/2 = {}, got ν = {nu}",
                        self.alpha + 0.5
                    )));
                }
            }
        }
        // the summand must not depend on the choice inside Γ∞γ
        let l = width_at_infinity(self.multiplier.group());
        let z0 = UHPoint::new(0.137, 1.29)?;
        let f0 = self.seed_value(z0)?;
        let f1 = self.seed_value(UHPoint::new(z0.x + l as f64, z0.y)?)?;
        let vt = self.multiplier.evaluate(&GroupElement::t_pow(l as i64))?;
        if (f1 - vt * f0).norm() > 1e-9 * f0.norm() {
            return Err(Error::InvalidSpec(format!(
                "seed picks up {} under T^{l} but v(T^{l}) = {vt}",
                f1 / f0
            )));
        }
        Ok(())
    }

    pub fn seed_value(&self, z: UHPoint) -> Result<C> {
        match &self.seed {
            Seed::Power { nu } => Ok(y_pow(z.y, 0.5 + nu)),
            Seed::LiftedHolomorphic { h } => Ok(y_pow(z.y, self.weight() / 2.0) * h.eval(z)),
            Seed::MTildeTerm { n, nu } => {
                BasisTerm::new(*n, 1.0, *nu, self.weight(), Family::Mtilde)?.eval(z)
            }
        }
    }

    /// `B` in `|F(w)| ≤ B Im(w)^σ`, valid for `Im(w) ≤ t_max`.
    fn seed_bound(&self, t_max: f64) -> Result<f64> {
        match &self.seed {
            Seed::Power { .. } => Ok(1.0),
            Seed::LiftedHolomorphic { h } => Ok(h.sup_bound().unwrap_or(f64::INFINITY)),
            Seed::MTildeTerm { n, nu } => {
                // |M̃(t)| ≤ |Γ(a)| t^σ Σ |(a)_j| / |Γ(b+j)| t0^j / j!  for t ≤ t0
                let kappa = n.signum() * self.weight() / 2.0;
                let a = nu - kappa + 0.5;
                let b = 1.0 + 2.0 * nu;
                let scale = 4.0 * PI * n.abs();
                let t0 = scale * t_max;
                let mut poch = 1.0;
                let mut pow = 1.0;
                let mut sum = 0.0;
                for j in 0..5000 {
                    let term = poch * rgamma(b + j as f64).norm() * pow;
                    sum += term;
                    if j as f64 > a.norm() + t0 && term < 1e-17 * sum {
                        break;
                    }
                    poch *= (a + j as f64).norm();
                    pow *= t0 / (j + 1) as f64;
                }
                Ok(gamma_complex(a)?.norm() * scale.powf(self.sigma()) * sum)
            }
        }
    }

    /// Bound on the sum of the terms with `c² + d² > R²` at `z`.
    pub fn tail_bound(&self, z: UHPoint, radius: f64) -> Result<f64> {
        let group = self.multiplier.group();
        let l = width_at_infinity(group) as f64;
        let k1 = 2.0 + l * l / 4.0;
        let cz = pointwise_constant(z);
        let sigma = self.sigma();
        let phase = (PI * self.weight().im.abs()).exp();
        let b = self.seed_bound(cz * z.y / (radius * radius))?;
        let half = if has_neg_identity(group) { 0.5 } else { 1.0 };
        Ok(self.k_const
            * k1.powf(self.alpha)
            * phase
            * b
            * (cz * z.y).powf(sigma)
            * half
            * lattice_tail(self.term_exponent(), radius))
    }

    /// `v(γ)^{-1} e^{-ik arg(cz+d)} F(γz)`.
    pub fn term(&self, gamma: &GroupElement, z: UHPoint) -> Result<C> {
        let f = self.seed_value(apply_moebius(gamma, z))?;
        Ok(f / (self.multiplier.evaluate(gamma)? * automorphy_phase(gamma, z, self.weight())))
    }

    pub fn representatives(&self, radius: f64) -> Result<Vec<GroupElement>> {
        cosets_at_infinity(self.multiplier.group(), radius)
    }

    /// Partial sums at each radius in one pass over the representatives.
    pub fn partial_sums(&self, z: UHPoint, radii: &[f64]) -> Result<Vec<SeriesValue>> {
        let r_max = radii.iter().cloned().fold(0.0, f64::max);
        let reps = self.representatives(r_max)?;
        self.partial_sums_over(&reps, z, radii)
    }

    fn partial_sums_over(
        &self,
        reps: &[GroupElement],
        z: UHPoint,
        radii: &[f64],
    ) -> Result<Vec<SeriesValue>> {
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&i, &j| radii[i].total_cmp(&radii[j]));
        let mut out = vec![None; radii.len()];
        let mut sum = C::new(0.0, 0.0);
        let mut count = 0;
        let mut it = reps.iter().peekable();
        for &i in &order {
            let r2 = radii[i] * radii[i];
            while let Some(g) = it.next_if(|g| bottom_norm_sq(g) <= r2) {
                sum += self.term(g, z)?;
                count += 1;
            }
            out[i] = Some(SeriesValue {
                radius: radii[i],
                value: sum,
                tail_bound: self.tail_bound(z, radii[i])?,
                terms: count,
            });
        }
        Ok(out
            .into_iter()
            .map(|v| v.expect("every radius visited"))
            .collect())
    }
}

fn bottom_norm_sq(g: &GroupElement) -> f64 {
    let [_, _, c, d] = g.entries_f64();
    c * c + d * d
}

/// Truncated Eisenstein series (power seed) at `z`.
pub fn eisenstein_truncated(spec: &SeriesSpec, z: UHPoint) -> Result<SeriesValue> {
    if !matches!(spec.seed, Seed::Power { .. }) {
        return Err(Error::InvalidSpec(
            "Eisenstein series need the power seed".into(),
        ));
    }
    Ok(spec.partial_sums(z, &[spec.radius])?[0])
}

/// Truncated Poincaré series (lifted or `M̃` seed) at `z`.
pub fn poincare_truncated(spec: &SeriesSpec, z: UHPoint) -> Result<SeriesValue> {
    if matches!(spec.seed, Seed::Power { .. }) {
        return Err(Error::InvalidSpec(
            "Poincaré series need a lifted or M̃ seed".into(),
        ));
    }
    Ok(spec.partial_sums(z, &[spec.radius])?[0])
}

/// The truncated series as a form; representatives are enumerated once.
pub fn series_form(spec: &SeriesSpec) -> Result<GeneralizedMaassForm> {
    let reps = Arc::new(spec.representatives(spec.radius)?);
    let s = spec.clone();
    let eval =
        SmoothEvaluator::new(move |z| Ok(s.partial_sums_over(&reps, z, &[s.radius])?[0].value));
    let provenance = match spec.seed {
        Seed::Power { .. } => Provenance::Eisenstein,
        _ => Provenance::Poincare,
    };
    Ok(GeneralizedMaassForm::new(
        Arc::clone(&spec.multiplier),
        spec.nu(),
        eval,
        provenance,
    ))
}

/// Residual of the transformation law for a truncated series and the budget allowed by
/// the tail bounds at `z` and `γz`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesTransformationCheck {
    pub residual: f64,
    pub budget: f64,
}

pub fn verify_series_transformation(
    spec: &SeriesSpec,
    samples: &[(GroupElement, UHPoint)],
) -> Result<Vec<SeriesTransformationCheck>> {
    let reps = spec.representatives(spec.radius)?;
    let k = spec.weight();
    let mut out = Vec::with_capacity(samples.len());
    for (g, z) in samples {
        let gz = apply_moebius(g, *z);
        let at = |w: UHPoint| -> Result<SeriesValue> {
            Ok(spec.partial_sums_over(&reps, w, &[spec.radius])?[0])
        };
        let (pz, pgz) = (at(*z)?, at(gz)?);
        let v = spec.multiplier.evaluate(g)?;
        let phase = automorphy_phase(g, *z, k);
        out.push(SeriesTransformationCheck {
            residual: (pgz.value / phase - v * pz.value).norm(),
            budget: pgz.tail_bound / phase.norm() + v.norm() * pz.tail_bound,
        });
    }
    Ok(out)
}

/// `max |e^{-ik arg(cz+d)} u(γz) - v(γ)u(z)| / (1 + |u(z)|)` over the samples.
pub fn verify_transformation(
    u: &GeneralizedMaassForm,
    samples: &[(GroupElement, UHPoint)],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (g, z) in samples {
        let uz = u.eval(*z)?;
        let lhs = u.eval(apply_moebius(g, *z))? / automorphy_phase(g, *z, u.weight);
        let rhs = u.multiplier.evaluate(g)? * uz;
        worst = worst.max((lhs - rhs).norm() / (1.0 + uz.norm()));
    }
    Ok(worst)
}

/// Whether `|u(g_q(iy))| e^{-cy}` stops increasing on the grid and never increases again.
pub fn verify_growth(
    u: &GeneralizedMaassForm,
    q: &CuspData,
    c: f64,
    y_grid: &[f64],
) -> Result<bool> {
    if y_grid.windows(2).any(|w| w[1] <= w[0]) || y_grid.last().is_none_or(|&y| y < 20.0) {
        return Err(Error::InvalidSpec(
            "y grid must be increasing and reach 20".into(),
        ));
    }
    let mut g = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        let z = apply_moebius(&q.scaling, UHPoint::new(0.0, y)?);
        g.push(u.eval(z)?.norm() * (-c * y).exp());
    }
    let tol = 1e-9;
    let Some(start) = g.windows(2).position(|w| w[1] <= w[0] * (1.0 + tol)) else {
        return Ok(false);
    };
    Ok(g[start..]
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + tol) + 1e-300))
}
