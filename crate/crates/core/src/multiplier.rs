//! Multiplier systems of complex weight, stored by their values on the Schreier generators
//! and extended to the whole group through the consistency factor.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modgroup::{arg, GroupElement, UHPoint};
use crate::subgroup::{cusps, CongruenceSubgroup, CosetTable, Presentation, SubgroupKind};

const RELATION_TOL: f64 = 1e-10;
const Z_TOL: f64 = 1e-12;

/// Anything that assigns values to group elements at a given weight.
pub trait Multiplier {
    fn weight(&self) -> Complex64;
    fn value(&self, gamma: &GroupElement) -> Result<Complex64>;
}

fn arg_sum(gamma: &GroupElement, delta: &GroupElement, z: UHPoint) -> f64 {
    let gd = gamma * delta;
    let dz = crate::modgroup::apply_moebius(delta, z);
    arg(gamma.denominator_at(dz)) + arg(delta.denominator_at(z)) - arg(gd.denominator_at(z))
}

/// `ω(γ, δ) = exp(ik(arg(c_γ δz + d_γ) + arg(c_δ z + d_δ) - arg(c_{γδ} z + d_{γδ})))`,
/// evaluated at `z = 2i` and checked at `z = 1 + i`.
pub fn consistency_factor(
    gamma: &GroupElement,
    delta: &GroupElement,
    k: Complex64,
) -> Result<Complex64> {
    let z1 = UHPoint { x: 0.0, y: 2.0 };
    let z2 = UHPoint { x: 1.0, y: 1.0 };
    let w1 = (Complex64::i() * k * arg_sum(gamma, delta, z1)).exp();
    let w2 = (Complex64::i() * k * arg_sum(gamma, delta, z2)).exp();
    if (w1 - w2).norm() > Z_TOL * w1.norm().max(1.0) {
        return Err(Error::ZDependence(format!(
            "ω({gamma}, {delta}) = {w1} at 2i but {w2} at 1+i"
        )));
    }
    Ok(w1)
}

#[derive(Clone, Debug, PartialEq)]
pub enum MultiplierKind {
    Trivial,
    Eta,
    Exponential { s: Complex64, phi: Vec<i64> },
    Custom,
}

/// A multiplier system `v: Γ → ℂ^×` of weight `k`.
pub struct MultiplierSystem {
    group: CongruenceSubgroup,
    table: Arc<CosetTable>,
    presentation: Arc<Presentation>,
    weight: Complex64,
    generator_values: Vec<Complex64>,
    kind: MultiplierKind,
    cache: RwLock<HashMap<GroupElement, Complex64>>,
}

impl fmt::Debug for MultiplierSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSystem")
            .field("group", &self.group)
            .field("weight", &self.weight)
            .field("kind", &self.kind)
            .field("generator_values", &self.generator_values)
            .finish()
    }
}

impl Clone for MultiplierSystem {
    fn clone(&self) -> Self {
        MultiplierSystem {
            group: self.group,
            table: Arc::clone(&self.table),
            presentation: Arc::clone(&self.presentation),
            weight: self.weight,
            generator_values: self.generator_values.clone(),
            kind: self.kind.clone(),
            cache: RwLock::new(HashMap::new()),
        }
    }
}

impl MultiplierSystem {
    fn build(
        group: CongruenceSubgroup,
        weight: Complex64,
        generator_values: Vec<Complex64>,
        kind: MultiplierKind,
    ) -> Result<Self> {
        let table = CosetTable::new(group)?;
        let presentation = Presentation::new(&table);
        let n = presentation.generators().len();
        if generator_values.len() != n {
            return Err(Error::InvalidMultiplier(format!(
                "{group} has {n} generators, got {} values",
                generator_values.len()
            )));
        }
        if let Some(i) = generator_values.iter().position(|v| !v.norm().is_normal()) {
            return Err(Error::InvalidMultiplier(format!(
                "generator {i} has value {}",
                generator_values[i]
            )));
        }
        let v = MultiplierSystem {
            group,
            table: Arc::new(table),
            presentation: Arc::new(presentation),
            weight,
            generator_values,
            kind,
            cache: RwLock::new(HashMap::new()),
        };
        v.validate()?;
        Ok(v)
    }

    fn validate(&self) -> Result<()> {
        for (idx, rel) in self.presentation.relations().iter().enumerate() {
            let (val, _) = self.fold(rel)?;
            if (val - 1.0).norm() > RELATION_TOL {
                return Err(Error::InvalidMultiplier(format!(
                    "relation {idx} evaluates to {val} instead of 1"
                )));
            }
        }
        let minus = GroupElement::neg_identity();
        if self.group.contains(&minus) {
            let got = self.evaluate(&minus)?;
            let want = (-Complex64::i() * PI * self.weight).exp();
            if (got - want).norm() > RELATION_TOL * want.norm().max(1.0) {
                return Err(Error::InvalidMultiplier(format!(
                    "v(-I) = {got} but weight {} forces {want}",
                    self.weight
                )));
            }
        }
        Ok(())
    }

    /// Values prescribed on the Schreier generators of `group`, checked against all relations.
    pub fn from_generator_values(
        group: CongruenceSubgroup,
        weight: Complex64,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        Self::build(group, weight, values, MultiplierKind::Custom)
    }

    /// `v ≡ 1` at weight 0.
    pub fn trivial(group: CongruenceSubgroup) -> Result<Self> {
        Self::trivial_with_weight(group, Complex64::new(0.0, 0.0))
    }

    /// `v ≡ 1` at weight `k`; only consistent when the relations allow it (for instance
    /// even integer `k`).
    pub fn trivial_with_weight(group: CongruenceSubgroup, weight: Complex64) -> Result<Self> {
        let n = Presentation::new(&CosetTable::new(group)?)
            .generators()
            .len();
        Self::build(
            group,
            weight,
            vec![Complex64::new(1.0, 0.0); n],
            MultiplierKind::Trivial,
        )
    }

    /// The multiplier of `y^{1/4} η(z)` (weight 1/2), restricted to `group`.
    pub fn eta(group: CongruenceSubgroup) -> Result<Self> {
        let full = Self::eta_full()?;
        if group.is_full() {
            return Ok(full);
        }
        let mut v = full.restrict(group)?;
        v.kind = MultiplierKind::Eta;
        Ok(v)
    }

    fn eta_full() -> Result<Self> {
        let group = CongruenceSubgroup::full();
        let table = CosetTable::new(group)?;
        let pres = Presentation::new(&table);
        let k = Complex64::new(0.5, 0.0);
        let points = [UHPoint { x: 0.1, y: 1.2 }, UHPoint { x: 0.2, y: 1.1 }];
        let mut values = Vec::new();
        for g in pres.generators() {
            let est: Vec<Complex64> = points.iter().map(|&z| eta_ratio(g, z, k)).collect();
            if (est[0] - est[1]).norm() > 1e-12 {
                return Err(Error::Internal(format!(
                    "eta multiplier at {g} not constant: {est:?}"
                )));
            }
            values.push(est[0]);
        }
        Self::build(group, k, values, MultiplierKind::Eta)
    }

    /// `v(γ) = e^{s φ(γ)}` at weight 0, for an integer homomorphism `φ` given by its values on
    /// the Schreier generators.
    pub fn exponential(group: CongruenceSubgroup, phi: Vec<i64>, s: Complex64) -> Result<Self> {
        let table = CosetTable::new(group)?;
        let pres = Presentation::new(&table);
        if phi.len() != pres.generators().len() {
            return Err(Error::InvalidMultiplier(format!(
                "{group} has {} generators, φ has {} values",
                pres.generators().len(),
                phi.len()
            )));
        }
        if !pres.respects_relations(&phi) {
            return Err(Error::InvalidMultiplier(
                "φ violates a relation of the presentation".into(),
            ));
        }
        let values = phi.iter().map(|&p| (s * p as f64).exp()).collect();
        Self::build(
            group,
            Complex64::new(0.0, 0.0),
            values,
            MultiplierKind::Exponential { s, phi },
        )
    }

    /// The restriction to a subgroup `sub ⊂ Γ`.
    pub fn restrict(&self, sub: CongruenceSubgroup) -> Result<Self> {
        let table = CosetTable::new(sub)?;
        let pres = Presentation::new(&table);
        let values = pres
            .generators()
            .iter()
            .map(|g| self.evaluate(g))
            .collect::<Result<Vec<_>>>()?;
        Self::build(sub, self.weight, values, self.kind.clone())
    }

    /// The same generator values read at another weight (for instance an exponential
    /// multiplier at even integer weight); revalidated against the relations.
    pub fn with_weight(&self, weight: Complex64) -> Result<Self> {
        Self::build(
            self.group,
            weight,
            self.generator_values.clone(),
            self.kind.clone(),
        )
    }

    pub fn group(&self) -> CongruenceSubgroup {
        self.group
    }

    pub fn weight(&self) -> Complex64 {
        self.weight
    }

    pub fn kind(&self) -> &MultiplierKind {
        &self.kind
    }

    pub fn generator_values(&self) -> &[Complex64] {
        &self.generator_values
    }

    pub fn coset_table(&self) -> &CosetTable {
        &self.table
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    fn generator_value(&self, g: usize, inverse: bool) -> Result<Complex64> {
        let v = self.generator_values[g];
        if !inverse {
            return Ok(v);
        }
        // v(s) v(s^{-1}) ω(s, s^{-1}) = v(I) = 1
        let s = &self.presentation.generators()[g];
        let w = consistency_factor(s, &s.inverse(), self.weight)?;
        Ok(1.0 / (v * w))
    }

    fn fold(&self, word: &[(usize, bool)]) -> Result<(Complex64, GroupElement)> {
        let mut acc = GroupElement::identity();
        let mut val = Complex64::new(1.0, 0.0);
        for &(g, inv) in word {
            let m = if inv {
                self.presentation.generators()[g].inverse()
            } else {
                self.presentation.generators()[g].clone()
            };
            val *= self.generator_value(g, inv)? * consistency_factor(&acc, &m, self.weight)?;
            acc = &acc * &m;
        }
        Ok((val, acc))
    }

    /// `v(γ)`; fails for `γ ∉ Γ`.
    pub fn evaluate(&self, gamma: &GroupElement) -> Result<Complex64> {
        if let Some(v) = self.cache.read().expect("cache lock poisoned").get(gamma) {
            return Ok(*v);
        }
        let word = self.presentation.rewrite(&self.table, gamma)?;
        let (val, prod) = self.fold(&word)?;
        if &prod != gamma {
            return Err(Error::Internal(format!(
                "rewriting of {gamma} produced {prod}"
            )));
        }
        self.cache
            .write()
            .expect("cache lock poisoned")
            .insert(gamma.clone(), val);
        Ok(val)
    }

    /// `|v(γ_q)| = 1` for the stabilizer generator of every cusp.
    pub fn is_weakly_parabolic(&self) -> Result<bool> {
        for cusp in cusps(&self.table)? {
            if (self.evaluate(&cusp.stabilizer)?.norm() - 1.0).abs() > 1e-12 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Largest `|log |v(s)||` over generators: `|v(γ)| ≤ e^{λ·ℓ(γ)}` for words of length `ℓ`.
    pub fn log_growth_rate(&self) -> f64 {
        self.generator_values
            .iter()
            .map(|v| v.norm().ln().abs())
            .fold(0.0, f64::max)
    }
}

impl Multiplier for MultiplierSystem {
    fn weight(&self) -> Complex64 {
        self.weight
    }

    fn value(&self, gamma: &GroupElement) -> Result<Complex64> {
        self.evaluate(gamma)
    }
}

/// `η(z) = q^{1/24} ∏ (1 - q^n)` truncated at 200 factors.
pub fn eta_product(z: Complex64) -> Complex64 {
    let q = (2.0 * PI * Complex64::i() * z).exp();
    let mut prod = (2.0 * PI * Complex64::i() * z / 24.0).exp();
    let mut qn = q;
    for _ in 0..200 {
        prod *= 1.0 - qn;
        qn *= q;
    }
    prod
}

fn eta_ratio(g: &GroupElement, z: UHPoint, k: Complex64) -> Complex64 {
    // F(z) = y^{1/4} η(z) satisfies F(gz) = v(g) e^{ik arg(cz+d)} F(z)
    let gz = crate::modgroup::apply_moebius(g, z);
    let f = |w: UHPoint| w.y.powf(0.25) * eta_product(w.to_complex());
    f(gz) / ((Complex64::i() * k * arg(g.denominator_at(z))).exp() * f(z))
}

/// Result of checking whether `v*` is unitary on all of `Γ*` given that it is unitary on `Γ`.
#[derive(Clone, Debug, Serialize)]
pub struct UnitaryExtensionReport {
    pub unitary: bool,
    pub reps: Vec<RepModulus>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RepModulus {
    pub rep: String,
    pub modulus: f64,
    /// `|v*(r^n)|` for `n = 1..10`, present when `|v*(r)| ≠ 1`.
    pub powers: Option<Vec<f64>>,
}

/// Checks `|v*(g)| = 1` on the coset representatives of `Γ` in `Γ*`, after verifying that `v*`
/// is unitary on the generators of `Γ`.
pub fn check_unitary_extension<M: Multiplier + ?Sized>(
    v_star: &M,
    super_group: CongruenceSubgroup,
    sub: CongruenceSubgroup,
) -> Result<UnitaryExtensionReport> {
    let table = CosetTable::new(sub)?;
    let pres = Presentation::new(&table);
    for g in pres.generators() {
        if !super_group.contains(g) {
            return Err(Error::InvalidSpec(format!(
                "{sub} is not contained in {super_group}"
            )));
        }
        let m = v_star.value(g)?.norm();
        if (m - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidMultiplier(format!(
                "precondition fails: |v*({g})| = {m} on a generator of {sub}"
            )));
        }
    }
    let mut reps = Vec::new();
    let mut unitary = true;
    for r in table.reps().iter().filter(|r| super_group.contains(r)) {
        let modulus = v_star.value(r)?.norm();
        let powers = if (modulus - 1.0).abs() > 1e-10 {
            unitary = false;
            Some(
                (1..=10)
                    .map(|n| v_star.value(&r.pow(n)).map(|v| v.norm()))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        reps.push(RepModulus {
            rep: r.to_string(),
            modulus,
            powers,
        });
    }
    Ok(UnitaryExtensionReport { unitary, reps })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroupDescriptor {
    pub kind: SubgroupKind,
    pub level: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
pub struct ExponentialParams {
    pub s: [f64; 2],
    #[serde(default)]
    pub phi: BTreeMap<usize, i64>,
}

/// JSON description of a multiplier system.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MultiplierDescriptor {
    pub group: GroupDescriptor,
    #[serde(default)]
    pub weight: [f64; 2],
    pub kind: String,
    #[serde(default)]
    pub params: Option<ExponentialParams>,
}

impl MultiplierDescriptor {
    pub fn build(&self) -> Result<MultiplierSystem> {
        let group = CongruenceSubgroup::new(self.group.kind, self.group.level)?;
        let weight = Complex64::new(self.weight[0], self.weight[1]);
        match self.kind.as_str() {
            "trivial" => MultiplierSystem::trivial_with_weight(group, weight),
            "eta" => {
                if weight != Complex64::new(0.5, 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "the eta multiplier has weight 1/2, not {weight}"
                    )));
                }
                MultiplierSystem::eta(group)
            }
            "exponential" => {
                if weight != Complex64::new(0.0, 0.0) {
                    return Err(Error::InvalidSpec(
                        "exponential multipliers have weight 0".into(),
                    ));
                }
                let params = self.params.as_ref().ok_or_else(|| {
                    Error::InvalidSpec("exponential multiplier needs params".into())
                })?;
                let n = Presentation::new(&CosetTable::new(group)?)
                    .generators()
                    .len();
                let mut phi = vec![0; n];
                for (&i, &val) in &params.phi {
                    if i >= n {
                        return Err(Error::InvalidSpec(format!(
                            "generator index {i} out of range (0..{n})"
                        )));
                    }
                    phi[i] = val;
                }
                MultiplierSystem::exponential(group, phi, Complex64::new(params.s[0], params.s[1]))
            }
            other => Err(Error::InvalidSpec(format!(
                "unknown multiplier kind {other:?}"
            ))),
        }
    }
}
