//! Induced representations: the right regular representation on `Γ\SL(2, Z)`, weight
//! matrices induced from multipliers, vector-valued forms and the maps `Π`, `π` between
//! scalar forms on `Γ` and vector-valued forms on the full modular group.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forms::{GeneralizedMaassForm, Provenance, QExpansion};
use crate::modgroup::{apply_moebius, arg, automorphy_phase, GroupElement, Letter, UHPoint};
use crate::multiplier::MultiplierSystem;
use crate::operators::{extrapolated, laplacian_fd, SmoothEvaluator};
use crate::subgroup::CosetTable;

type C = Complex64;
pub type Matrix = DMatrix<C>;

type EntryFn = Arc<dyn Fn(&GroupElement, UHPoint) -> Result<Matrix> + Send + Sync>;

/// `χ₀(h)_{ij} = δ_Γ(g_i h g_j^{-1})`, a permutation matrix.
pub fn right_regular_chi0(table: &CosetTable, h: &GroupElement) -> Result<Matrix> {
    let mu = table.index();
    let mut m = Matrix::zeros(mu, mu);
    for (i, g) in table.reps().iter().enumerate() {
        let (j, _) = table.coset_index_of(&(g * h))?;
        m[(i, j)] = C::new(1.0, 0.0);
    }
    Ok(m)
}

/// Exactly one nonzero entry in every row and every column.
pub fn is_monomial(m: &Matrix) -> bool {
    let zero = C::new(0.0, 0.0);
    m.is_square()
        && m.row_iter()
            .all(|r| r.iter().filter(|x| **x != zero).count() == 1)
        && m.column_iter()
            .all(|c| c.iter().filter(|x| **x != zero).count() == 1)
}

/// A function `w(h, z)` with values in `p × p` matrices.
#[derive(Clone)]
pub struct WeightMatrix {
    dim: usize,
    f: EntryFn,
}

impl fmt::Debug for WeightMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightMatrix")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl WeightMatrix {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&GroupElement, UHPoint) -> Result<Matrix> + Send + Sync + 'static,
    {
        WeightMatrix {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, h: &GroupElement, z: UHPoint) -> Result<Matrix> {
        (self.f)(h, z)
    }

    /// `max |w(gh, z) - w(g, hz) w(h, z)|`, entrywise.
    pub fn cocycle_residual(&self, g: &GroupElement, h: &GroupElement, z: UHPoint) -> Result<f64> {
        let lhs = self.eval(&(g * h), z)?;
        let rhs = self.eval(g, apply_moebius(h, z))? * self.eval(h, z)?;
        Ok((lhs - rhs).iter().map(|x| x.norm()).fold(0.0, f64::max))
    }
}

/// The weight matrix of `Π(u)` for forms on `Γ` with multiplier `v`:
/// with `γ = g_i h g_j^{-1} ∈ Γ`,
/// `w_ij(h, z) = v(γ) e^{ik[arg(c_γ g_j z + d_γ) + arg(c_{g_j} z + d_{g_j}) - arg(c_{g_i} hz + d_{g_i})]}`.
pub fn induced_weight_matrix(
    v: Arc<MultiplierSystem>,
    table: Arc<CosetTable>,
) -> Result<WeightMatrix> {
    if table.group() != v.group() {
        return Err(Error::InvalidSpec(format!(
            "coset table of {} used with a multiplier on {}",
            table.group(),
            v.group()
        )));
    }
    let mu = table.index();
    let k = v.weight();
    Ok(WeightMatrix::new(mu, move |h, z| {
        let hz = apply_moebius(h, z);
        let reps = table.reps();
        let mut m = Matrix::zeros(mu, mu);
        for (i, gi) in reps.iter().enumerate() {
            let (j, gamma) = table.coset_index_of(&(gi * h))?;
            let gj = &reps[j];
            let phase = arg(gamma.denominator_at(apply_moebius(gj, z))) + arg(gj.denominator_at(z))
                - arg(gi.denominator_at(hz));
            m[(i, j)] = v.evaluate(&gamma)? * (C::i() * k * phase).exp();
        }
        Ok(m)
    }))
}

/// Components `u_1, …, u_t` with `u(gz) = w(g, z) u(z)` and `Δ_k u_i = (1/4 - ν²) u_i`.
#[derive(Clone, Debug)]
pub struct VectorValuedForm {
    pub components: Vec<SmoothEvaluator>,
    pub weight_matrix: WeightMatrix,
    pub k: C,
    pub nu: C,
    /// Growth constant at the cusps, when declared.
    pub growth: Option<f64>,
}

impl VectorValuedForm {
    pub fn new(
        components: Vec<SmoothEvaluator>,
        weight_matrix: WeightMatrix,
        k: C,
        nu: C,
    ) -> Result<Self> {
        if components.len() != weight_matrix.dimension() || components.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "{} components for a weight matrix of dimension {}",
                components.len(),
                weight_matrix.dimension()
            )));
        }
        Ok(VectorValuedForm {
            components,
            weight_matrix,
            k,
            nu,
            growth: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn eigenvalue(&self) -> C {
        0.25 - self.nu * self.nu
    }

    pub fn eval(&self, z: UHPoint) -> Result<Vec<C>> {
        self.components.iter().map(|u| u.eval(z)).collect()
    }

    /// `max |u(gz) - w(g, z) u(z)|_∞ / (1 + |u(z)|_∞)` over the samples.
    pub fn transformation_residual(&self, samples: &[(GroupElement, UHPoint)]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (g, z) in samples {
            let uz = nalgebra::DVector::from_vec(self.eval(*z)?);
            let ugz = nalgebra::DVector::from_vec(self.eval(apply_moebius(g, *z))?);
            let diff = ugz - self.weight_matrix.eval(g, *z)? * &uz;
            let scale = 1.0 + uz.iter().map(|x| x.norm()).fold(0.0, f64::max);
            worst = worst.max(diff.iter().map(|x| x.norm()).fold(0.0, f64::max) / scale);
        }
        Ok(worst)
    }

    /// Largest `|Δ_k u_i - λ u_i| / (1 + |u_i|)` at `z`, by extrapolated differences.
    pub fn eigen_residual(&self, z: UHPoint, h: f64) -> Result<f64> {
        let lambda = self.eigenvalue();
        let mut worst: f64 = 0.0;
        for u in &self.components {
            let uz = u.eval(z)?;
            let lap = extrapolated(h, |s| laplacian_fd(u, self.k, z, s))?;
            worst = worst.max((lap - lambda * uz).norm() / (1.0 + uz.norm()));
        }
        Ok(worst)
    }
}

/// `Π(u) = (u|_k g_1, …, u|_k g_μ)` with the induced weight matrix.
pub fn lift_pi(u: &GeneralizedMaassForm, table: Arc<CosetTable>) -> Result<VectorValuedForm> {
    let components = table
        .reps()
        .iter()
        .map(|g| u.evaluator.slashed(u.weight, g.clone()))
        .collect();
    let w = induced_weight_matrix(Arc::clone(&u.multiplier), table)?;
    VectorValuedForm::new(components, w, u.weight, u.nu)
}

/// `π(ū)`: the component at the first representative lying in `Γ`, divided by `v(g_j)`.
pub fn project_pi(
    vu: &VectorValuedForm,
    v: Arc<MultiplierSystem>,
    table: &CosetTable,
) -> Result<GeneralizedMaassForm> {
    if vu.dimension() != table.index() {
        return Err(Error::InvalidSpec(format!(
            "form of dimension {} cannot come from {} cosets",
            vu.dimension(),
            table.index()
        )));
    }
    let group = table.group();
    let j = table
        .reps()
        .iter()
        .position(|g| group.contains(g))
        .ok_or_else(|| Error::InvalidSpec(format!("no coset representative lies in {group}")))?;
    let scale = v.evaluate(&table.reps()[j])?;
    let comp = vu.components[j].clone();
    let eval = if table.reps()[j].is_identity() {
        comp
    } else {
        SmoothEvaluator::new(move |z| Ok(comp.eval(z)? / scale))
    };
    Ok(GeneralizedMaassForm::new(v, vu.nu, eval, Provenance::Lift))
}

/// `ρ(g)` from `ρ(S)` and `ρ(T)` through the word of `g`.
fn rho_of(rho_s: &Matrix, rho_t: &Matrix, rho_t_inv: &Matrix, g: &GroupElement) -> Matrix {
    g.word()
        .iter()
        .fold(Matrix::identity(rho_s.nrows(), rho_s.ncols()), |acc, l| {
            acc * match l {
                Letter::S => rho_s,
                Letter::T => rho_t,
                Letter::TInv => rho_t_inv,
            }
        })
}

/// Components `Im(z)^{k/2} F_i(z)` with `w(g, z) = v(g) e^{ik arg(c_g z + d_g)} ρ(g)`; `ρ` is
/// given on `S` and `T` and must satisfy `ρ(S)^4 = 1`, `ρ(S)^2 = (ρ(S)ρ(T))^3`.
pub fn lift_holomorphic_vv(
    fvec: Vec<QExpansion>,
    k: C,
    rho_s: Matrix,
    rho_t: Matrix,
    v: Arc<MultiplierSystem>,
) -> Result<VectorValuedForm> {
    let p = fvec.len();
    if rho_s.shape() != (p, p) || rho_t.shape() != (p, p) {
        return Err(Error::InvalidSpec(format!("ρ must be {p} × {p}")));
    }
    if !v.group().is_full() || (v.weight() - k).norm() > 1e-12 {
        return Err(Error::InvalidSpec(
            "the multiplier must live on SL(2, Z) with weight k".into(),
        ));
    }
    let rho_t_inv = rho_t
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidSpec("ρ(T) is singular".into()))?;
    let s2 = &rho_s * &rho_s;
    let st = &rho_s * &rho_t;
    let relation = (&s2 * &s2 - Matrix::identity(p, p)).norm() + (&s2 - &st * &st * &st).norm();
    if relation > 1e-10 {
        return Err(Error::InvalidSpec(format!(
            "ρ violates the modular relations by {relation:e}"
        )));
    }
    let components = fvec
        .into_iter()
        .map(|f| SmoothEvaluator::new(move |z| Ok((k / 2.0 * z.y.ln()).exp() * f.eval(z))))
        .collect();
    let w = WeightMatrix::new(p, move |g, z| {
        let scalar = v.evaluate(g)? * automorphy_phase(g, z, k);
        Ok(rho_of(&rho_s, &rho_t, &rho_t_inv, g) * scalar)
    });
    VectorValuedForm::new(components, w, k, (k - 1.0) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::lift_holomorphic;
    use crate::modgroup::parse_word;
    use crate::subgroup::CongruenceSubgroup;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn pt(x: f64, y: f64) -> UHPoint {
        UHPoint::new(x, y).unwrap()
    }

    fn random_element(rng: &mut ChaCha8Rng, len: usize) -> GroupElement {
        let mut g = GroupElement::identity();
        for _ in 0..rng.gen_range(1..=len) {
            let l = [Letter::S, Letter::T, Letter::TInv][rng.gen_range(0..3)];
            g = &g * &l.matrix();
        }
        g
    }

    fn random_point(rng: &mut ChaCha8Rng) -> UHPoint {
        pt(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0))
    }

    fn table(level: u64) -> Arc<CosetTable> {
        Arc::new(CosetTable::new(CongruenceSubgroup::gamma0(level)).unwrap())
    }

    fn lifted_delta() -> GeneralizedMaassForm {
        let v = MultiplierSystem::trivial_with_weight(CongruenceSubgroup::full(), c(12.0, 0.0))
            .unwrap();
        lift_holomorphic(QExpansion::discriminant(80), c(12.0, 0.0), Arc::new(v)).unwrap()
    }

    #[test]
    fn chi0_examples() {
        let full = CosetTable::new(CongruenceSubgroup::full()).unwrap();
        assert_eq!(
            right_regular_chi0(&full, &GroupElement::s()).unwrap(),
            Matrix::identity(1, 1)
        );
        let t2 = table(2);
        assert_eq!(
            right_regular_chi0(&t2, &GroupElement::identity()).unwrap(),
            Matrix::identity(3, 3)
        );
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let expected =
            Matrix::from_row_slice(3, 3, &[zero, one, zero, one, zero, zero, zero, zero, one]);
        assert_eq!(
            right_regular_chi0(&t2, &GroupElement::s()).unwrap(),
            expected
        );
    }

    #[test]
    fn chi0_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for level in [2, 4] {
            let t = table(level);
            let group = t.group();
            for _ in 0..50 {
                let (g, h) = (random_element(&mut rng, 8), random_element(&mut rng, 8));
                let gh = right_regular_chi0(&t, &(&g * &h)).unwrap();
                let prod =
                    right_regular_chi0(&t, &g).unwrap() * right_regular_chi0(&t, &h).unwrap();
                assert_eq!(gh, prod);
                // brute-force membership oracle
                let m = right_regular_chi0(&t, &g).unwrap();
                for (i, gi) in t.reps().iter().enumerate() {
                    for (j, gj) in t.reps().iter().enumerate() {
                        let inside = group.contains(&(&(gi * &g) * &gj.inverse()));
                        assert_eq!(m[(i, j)] == c(1.0, 0.0), inside);
                    }
                }
            }
        }
    }

    #[test]
    fn induced_matrix_examples() {
        let full = Arc::new(CosetTable::new(CongruenceSubgroup::full()).unwrap());
        let eta = Arc::new(MultiplierSystem::eta(CongruenceSubgroup::full()).unwrap());
        let w = induced_weight_matrix(Arc::clone(&eta), Arc::clone(&full)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let (h, z) = (random_element(&mut rng, 6), random_point(&mut rng));
            let want = eta.evaluate(&h).unwrap() * automorphy_phase(&h, z, c(0.5, 0.0));
            assert!((w.eval(&h, z).unwrap()[(0, 0)] - want).norm() < 1e-13);
        }
        for level in [2, 4] {
            let t = table(level);
            let v = Arc::new(MultiplierSystem::trivial(t.group()).unwrap());
            let w = induced_weight_matrix(v, Arc::clone(&t)).unwrap();
            for _ in 0..20 {
                let (h, z) = (random_element(&mut rng, 8), random_point(&mut rng));
                let m = w.eval(&h, z).unwrap();
                assert_eq!(m, right_regular_chi0(&t, &h).unwrap());
                assert!(is_monomial(&m));
            }
        }
        let wrong = Arc::new(MultiplierSystem::trivial(CongruenceSubgroup::gamma0(4)).unwrap());
        assert!(induced_weight_matrix(wrong, table(2)).is_err());
    }

    fn exponential(level: u64) -> MultiplierSystem {
        let group = CongruenceSubgroup::gamma0(level);
        let phi = MultiplierSystem::trivial(group)
            .unwrap()
            .presentation()
            .integer_homomorphisms()[0]
            .clone();
        MultiplierSystem::exponential(group, phi, c(0.3, 0.1)).unwrap()
    }

    #[test]
    fn cocycle_for_induced_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for level in [2, 4] {
            let group = CongruenceSubgroup::gamma0(level);
            let systems = [
                MultiplierSystem::trivial(group).unwrap(),
                MultiplierSystem::eta(CongruenceSubgroup::full())
                    .unwrap()
                    .restrict(group)
                    .unwrap(),
                exponential(level),
            ];
            for v in systems {
                let w = induced_weight_matrix(Arc::new(v), table(level)).unwrap();
                for _ in 0..60 {
                    let (g, h) = (random_element(&mut rng, 8), random_element(&mut rng, 8));
                    let z = random_point(&mut rng);
                    assert!(w.cocycle_residual(&g, &h, z).unwrap() < 1e-10);
                    assert!(is_monomial(&w.eval(&g, z).unwrap()));
                }
            }
        }
    }

    #[test]
    fn literal_entry_formula_breaks_the_cocycle() {
        // v(γ) e^{ik arg(c_γ z + d_γ)} with γ = g_i h g_j^{-1}, evaluated at z
        let t = table(2);
        let v = Arc::new(
            MultiplierSystem::eta(CongruenceSubgroup::full())
                .unwrap()
                .restrict(t.group())
                .unwrap(),
        );
        let k = v.weight();
        let tt = Arc::clone(&t);
        let vv = Arc::clone(&v);
        let literal = WeightMatrix::new(3, move |h, z| {
            let mut m = Matrix::zeros(3, 3);
            for (i, gi) in tt.reps().iter().enumerate() {
                let (j, gamma) = tt.coset_index_of(&(gi * h))?;
                m[(i, j)] = vv.evaluate(&gamma)? * automorphy_phase(&gamma, z, k);
            }
            Ok(m)
        });
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let worst = (0..30)
            .map(|_| {
                let (g, h) = (random_element(&mut rng, 6), random_element(&mut rng, 6));
                literal
                    .cocycle_residual(&g, &h, random_point(&mut rng))
                    .unwrap()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-2, "{worst}");
    }

    fn pi_samples(rng: &mut ChaCha8Rng, t: &CosetTable, n: usize) -> Vec<(GroupElement, UHPoint)> {
        let mut out = Vec::new();
        while out.len() < n {
            let (g, z) = (
                random_element(rng, 5),
                pt(rng.gen_range(-0.5..0.5), rng.gen_range(0.8..1.5)),
            );
            let gz = apply_moebius(&g, z);
            let ok = t
                .reps()
                .iter()
                .all(|r| apply_moebius(r, z).y > 0.2 && apply_moebius(r, gz).y > 0.2);
            if ok {
                out.push((g, z));
            }
        }
        out
    }

    #[test]
    fn pi_of_lifted_delta_on_gamma0_2() {
        let t = table(2);
        let u = lifted_delta().restrict(t.group()).unwrap();
        let vu = lift_pi(&u, Arc::clone(&t)).unwrap();
        assert_eq!(vu.dimension(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let samples = pi_samples(&mut rng, &t, 20);
        assert!(vu.transformation_residual(&samples).unwrap() < 1e-8);

        // g_1 = I, so the first component is u itself
        let back = project_pi(&vu, Arc::clone(&u.multiplier), &t).unwrap();
        let again = lift_pi(&back, Arc::clone(&t)).unwrap();
        for _ in 0..50 {
            let z = pt(rng.gen_range(-0.5..0.5), rng.gen_range(0.6..2.0));
            let uz = u.eval(z).unwrap();
            assert!((back.eval(z).unwrap() - uz).norm() <= 1e-12 * uz.norm().max(1e-300));
            let (a, b) = (vu.eval(z).unwrap(), again.eval(z).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() <= 1e-12 * x.norm().max(1e-300));
            }
        }
        for z in [pt(0.1, 1.0), pt(-0.3, 1.4)] {
            assert!(vu.eigen_residual(z, 1e-3).unwrap() < 1e-6);
        }
    }

    #[test]
    fn full_group_is_trivial() {
        let full = Arc::new(CosetTable::new(CongruenceSubgroup::full()).unwrap());
        let u = lifted_delta();
        let vu = lift_pi(&u, Arc::clone(&full)).unwrap();
        assert_eq!(vu.dimension(), 1);
        let back = project_pi(&vu, Arc::clone(&u.multiplier), &full).unwrap();
        let z = pt(0.2, 1.1);
        assert_eq!(back.eval(z).unwrap(), u.eval(z).unwrap());
        assert!(project_pi(&vu, Arc::clone(&u.multiplier), &table(2)).is_err());
    }

    #[test]
    fn holomorphic_vv_matches_pi_of_lift() {
        let t = table(2);
        let u = lifted_delta();
        let via_pi = lift_pi(&u.restrict(t.group()).unwrap(), Arc::clone(&t)).unwrap();
        let one = c(1.0, 0.0);
        let s = right_regular_chi0(&t, &GroupElement::s()).unwrap();
        let tm = right_regular_chi0(&t, &GroupElement::t()).unwrap();
        let vv = lift_holomorphic_vv(
            vec![QExpansion::discriminant(80); 3],
            c(12.0, 0.0),
            s,
            tm,
            Arc::clone(&u.multiplier),
        )
        .unwrap();
        assert!((vv.eigenvalue() - c(-30.0, 0.0)).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let samples = pi_samples(&mut rng, &t, 20);
        for (g, z) in &samples {
            let (a, b) = (vv.eval(*z).unwrap(), via_pi.eval(*z).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
            }
            let diff =
                vv.weight_matrix.eval(g, *z).unwrap() - via_pi.weight_matrix.eval(g, *z).unwrap();
            assert!(diff.norm() < 1e-10);
        }
        assert!(vv.transformation_residual(&samples).unwrap() < 1e-8);
        assert!(vv.eigen_residual(pt(0.1, 1.0), 1e-3).unwrap() < 1e-6);

        // one-dimensional ρ ≡ 1 is the scalar lift
        let scalar = lift_holomorphic_vv(
            vec![QExpansion::discriminant(80)],
            c(12.0, 0.0),
            Matrix::from_element(1, 1, one),
            Matrix::from_element(1, 1, one),
            Arc::clone(&u.multiplier),
        )
        .unwrap();
        let z = pt(0.3, 0.9);
        assert!((scalar.eval(z).unwrap()[0] - u.eval(z).unwrap()).norm() < 1e-15);
        let g = parse_word("S T^2 S").unwrap();
        let w = scalar.weight_matrix.eval(&g, z).unwrap()[(0, 0)];
        assert!((w - automorphy_phase(&g, z, c(12.0, 0.0))).norm() < 1e-13);

        // ρ(S) = i, ρ(T) = 1: ρ(S)² = -1 but (ρ(S)ρ(T))³ = -i
        let bad = lift_holomorphic_vv(
            vec![QExpansion::one()],
            c(12.0, 0.0),
            Matrix::from_element(1, 1, c(0.0, 1.0)),
            Matrix::from_element(1, 1, one),
            Arc::clone(&u.multiplier),
        );
        assert!(bad.is_err());
    }
}
