//! Congruence subgroups of finite index: membership, right-coset tables,
//! cusps with widths and scaling matrices, and a Schreier presentation
//! used to rewrite group elements in subgroup generators.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modgroup::{apply_moebius_boundary, BoundaryPoint, GroupElement, Letter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgroupKind {
    Gamma0,
    Gamma1,
    /// The principal congruence subgroup Γ(N).
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CongruenceSubgroup {
    pub kind: SubgroupKind,
    pub level: u64,
}

impl CongruenceSubgroup {
    pub fn new(kind: SubgroupKind, level: u64) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidSpec("level must be positive".into()));
        }
        Ok(Self { kind, level })
    }

    pub fn gamma0(level: u64) -> Self {
        Self::new(SubgroupKind::Gamma0, level).expect("positive level")
    }

    pub fn full() -> Self {
        Self::gamma0(1)
    }

    pub fn is_full(&self) -> bool {
        self.level == 1
    }

    fn residues(&self, g: &GroupElement) -> [i64; 4] {
        let n = BigInt::from(self.level);
        let r = |x: &BigInt| x.mod_floor(&n).to_i64().expect("residue fits i64");
        [r(g.a()), r(g.b()), r(g.c()), r(g.d())]
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        if self.level == 1 {
            return true;
        }
        let [a, b, c, d] = self.residues(g);
        let one = 1 % self.level as i64;
        match self.kind {
            SubgroupKind::Gamma0 => c == 0,
            SubgroupKind::Gamma1 => c == 0 && a == one && d == one,
            SubgroupKind::Gamma => b == 0 && c == 0 && a == one && d == one,
        }
    }

    /// Index in SL(2, Z), from the standard product formulas.
    pub fn index(&self) -> u64 {
        let n = self.level;
        let primes = prime_divisors(n);
        match self.kind {
            SubgroupKind::Gamma0 => primes.iter().fold(n, |acc, &p| acc / p * (p + 1)),
            SubgroupKind::Gamma1 => primes
                .iter()
                .fold(n * n, |acc, &p| acc / (p * p) * (p * p - 1)),
            SubgroupKind::Gamma => primes
                .iter()
                .fold(n * n * n, |acc, &p| acc / (p * p) * (p * p - 1)),
        }
    }

    /// A key that is constant exactly on right cosets `Γ g`.
    fn coset_key(&self, g: &GroupElement) -> [i64; 4] {
        if self.level == 1 {
            return [0; 4];
        }
        let n = self.level as i64;
        let [a, b, c, d] = self.residues(g);
        match self.kind {
            SubgroupKind::Gamma0 => {
                // (c : d) in P^1(Z/N): minimal representative over units
                let mut best = [n, n];
                for u in 1..n {
                    if u.gcd(&n) == 1 {
                        let cand = [(u * c) % n, (u * d) % n];
                        if cand < best {
                            best = cand;
                        }
                    }
                }
                [best[0], best[1], 0, 0]
            }
            SubgroupKind::Gamma1 => [c, d, 0, 0],
            SubgroupKind::Gamma => [a, b, c, d],
        }
    }
}

impl fmt::Display for CongruenceSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            SubgroupKind::Gamma0 => "Gamma0",
            SubgroupKind::Gamma1 => "Gamma1",
            SubgroupKind::Gamma => "Gamma",
        };
        write!(f, "{name}({})", self.level)
    }
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

const LETTERS: [Letter; 3] = [Letter::S, Letter::T, Letter::TInv];

fn letter_index(l: Letter) -> usize {
    match l {
        Letter::S => 0,
        Letter::T => 1,
        Letter::TInv => 2,
    }
}

/// Right-coset representatives `g_1, …, g_μ` of `Γ` in SL(2, Z), with
/// `g_1 = I` and the permutation action of `S`, `T`, `T^{-1}` on cosets.
#[derive(Clone, Debug)]
pub struct CosetTable {
    group: CongruenceSubgroup,
    reps: Vec<GroupElement>,
    lookup: HashMap<[i64; 4], usize>,
    transitions: Vec<[usize; 3]>,
}

impl CosetTable {
    /// Breadth-first enumeration of `Γ\SL(2, Z)` over the letters `S, T, T^{-1}`.
    pub fn new(group: CongruenceSubgroup) -> Result<Self> {
        let mut reps = vec![GroupElement::identity()];
        let mut lookup = HashMap::new();
        lookup.insert(group.coset_key(&reps[0]), 0);
        let mut queue = VecDeque::from([0usize]);
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        while let Some(i) = queue.pop_front() {
            for letter in LETTERS {
                let g = &reps[i] * &letter.matrix();
                let key = group.coset_key(&g);
                let j = match lookup.get(&key) {
                    Some(&j) => j,
                    None => {
                        reps.push(g);
                        let j = reps.len() - 1;
                        lookup.insert(key, j);
                        queue.push_back(j);
                        j
                    }
                };
                edges.push((i, letter_index(letter), j));
            }
        }
        let mut transitions = vec![[0usize; 3]; reps.len()];
        for (i, l, j) in edges {
            transitions[i][l] = j;
        }
        if reps.len() as u64 != group.index() {
            return Err(Error::Internal(format!(
                "coset enumeration of {group} found {} cosets, index formula gives {}",
                reps.len(),
                group.index()
            )));
        }
        Ok(Self {
            group,
            reps,
            lookup,
            transitions,
        })
    }

    pub fn group(&self) -> CongruenceSubgroup {
        self.group
    }

    pub fn index(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[GroupElement] {
        &self.reps
    }

    /// Coset index reached from coset `i` by right multiplication with `letter`.
    pub fn step(&self, i: usize, letter: Letter) -> usize {
        self.transitions[i][letter_index(letter)]
    }

    pub fn coset_of(&self, g: &GroupElement) -> Result<usize> {
        self.lookup
            .get(&self.group.coset_key(g))
            .copied()
            .ok_or_else(|| Error::Internal(format!("no coset for {g}")))
    }

    /// The unique `j` with `g g_j^{-1} ∈ Γ`, and the witness `γ = g g_j^{-1}`.
    pub fn coset_index_of(&self, g: &GroupElement) -> Result<(usize, GroupElement)> {
        let j = self.coset_of(g)?;
        let gamma = g * &self.reps[j].inverse();
        if !self.group.contains(&gamma) {
            return Err(Error::Internal(format!(
                "coset table of {} misclassified {g}",
                self.group
            )));
        }
        Ok((j, gamma))
    }
}

/// A cusp `q = g_q ∞` with width `l_q` and stabilizer generator
/// `γ_q = g_q T^{l_q} g_q^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CuspData {
    pub q: BoundaryPoint,
    pub width: u64,
    pub scaling: GroupElement,
    pub stabilizer: GroupElement,
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if b.is_zero() {
        let s = if a.is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        return (a.abs(), s, BigInt::zero());
    }
    let (q, r) = a.div_mod_floor(b);
    let (g, x, y) = ext_gcd(b, &r);
    (g, y.clone(), x - q * y)
}

/// A matrix of SL(2, Z) whose first column is `(a, c)` (requires `gcd(a, c) = 1`).
pub fn lift_column(a: &BigInt, c: &BigInt) -> Result<GroupElement> {
    let (g, s, t) = ext_gcd(a, c);
    if !g.is_one() {
        return Err(Error::InvalidSpec(format!(
            "({a}, {c}) is not a primitive column"
        )));
    }
    // a s + c t = 1  =>  [[a, -t], [c, s]]
    GroupElement::new(a.clone(), -t, c.clone(), s)
}

/// A matrix of SL(2, Z) with bottom row `(c, d)` (requires `gcd(c, d) = 1`),
/// with the top row reduced so that `|a c + b d| <= (c^2 + d^2) / 2`.
pub fn lift_bottom_row(c: &BigInt, d: &BigInt) -> Result<GroupElement> {
    let (g, s, t) = ext_gcd(d, c);
    if !g.is_one() {
        return Err(Error::InvalidSpec(format!(
            "({c}, {d}) is not a primitive row"
        )));
    }
    // d s + c t = 1  =>  a = s, b = -t gives a d - b c = 1
    let (mut a, mut b) = (s, -t);
    let n = c * c + d * d;
    let dot = &a * c + &b * d;
    let two = BigInt::from(2);
    let shift = (&two * &dot + &n).div_floor(&(&two * &n));
    a -= &shift * c;
    b -= &shift * d;
    GroupElement::new(a, b, c.clone(), d.clone())
}

fn width_of(group: &CongruenceSubgroup, g: &GroupElement, bound: u64) -> Result<u64> {
    let ginv = g.inverse();
    let mut conj = g.clone();
    let t = GroupElement::t();
    for n in 1..=bound {
        conj = &conj * &t;
        if group.contains(&(&conj * &ginv)) {
            return Ok(n);
        }
    }
    Err(Error::Internal(format!(
        "no cusp width found for {g} in {group}"
    )))
}

/// Inequivalent cusps of `Γ`, `∞` first, each class represented by the
/// smallest rational under the order (denominator, numerator).
pub fn cusps(table: &CosetTable) -> Result<Vec<CuspData>> {
    let group = table.group();
    let mu = table.index();
    // orbits of <T, -I> acting on right cosets correspond to cusp classes
    let mut orbit = vec![usize::MAX; mu];
    let mut n_orbits = 0;
    for start in 0..mu {
        if orbit[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        orbit[start] = n_orbits;
        while let Some(i) = stack.pop() {
            let neg = table.coset_of(&table.reps()[i].neg())?;
            for j in [table.step(i, Letter::T), table.step(i, Letter::TInv), neg] {
                if orbit[j] == usize::MAX {
                    orbit[j] = n_orbits;
                    stack.push(j);
                }
            }
        }
        n_orbits += 1;
    }

    let bound = 2 * mu as u64 * group.level.max(1);
    let translation = width_of(&group, &GroupElement::identity(), bound)?;
    let mut found: Vec<Option<CuspData>> = vec![None; n_orbits];
    let make = |g: GroupElement| -> Result<CuspData> {
        let width = width_of(&group, &g, bound)?;
        let stabilizer = &(&g * &GroupElement::t_pow(width as i64)) * &g.inverse();
        Ok(CuspData {
            q: BoundaryPoint::cusp_of(&g),
            width,
            scaling: g,
            stabilizer,
        })
    };
    found[orbit[0]] = Some(make(GroupElement::identity())?);
    let mut remaining = n_orbits - 1;
    let mut den: i64 = 1;
    while remaining > 0 {
        if den as u64 > bound * bound {
            return Err(Error::Internal(format!(
                "cusp search for {group} did not terminate"
            )));
        }
        for num in 0..den * translation as i64 {
            if num.gcd(&den) != 1 {
                continue;
            }
            let g = lift_column(&BigInt::from(num), &BigInt::from(den))?;
            let o = orbit[table.coset_of(&g)?];
            if found[o].is_none() {
                found[o] = Some(make(g)?);
                remaining -= 1;
            }
        }
        den += 1;
    }
    let mut out: Vec<CuspData> = found
        .into_iter()
        .map(|c| c.expect("all orbits found"))
        .collect();
    out.sort_by_key(|x| cusp_order(&x.q));
    Ok(out)
}

fn cusp_order(q: &BoundaryPoint) -> (u8, BigInt, BigInt) {
    match q {
        BoundaryPoint::Infinity => (0, BigInt::zero(), BigInt::zero()),
        BoundaryPoint::Rational(r) => (1, r.denom().clone(), r.numer().clone()),
    }
}

/// Whether two boundary points are `Γ`-equivalent (via coset orbits).
pub fn cusps_equivalent(table: &CosetTable, p: &BoundaryPoint, q: &BoundaryPoint) -> Result<bool> {
    let group = table.group();
    let lift = |x: &BoundaryPoint| -> Result<GroupElement> {
        match x {
            BoundaryPoint::Infinity => Ok(GroupElement::identity()),
            BoundaryPoint::Rational(r) => lift_column(r.numer(), r.denom()),
        }
    };
    let gp = lift(p)?;
    let gq = lift(q)?;
    // p ~ q  iff  Γ g_p ⟨T, -I⟩ = Γ g_q ⟨T, -I⟩
    let target = table.coset_of(&gq)?;
    let mu = table.index() as i64;
    for sign in [GroupElement::identity(), GroupElement::neg_identity()] {
        let base = &gp * &sign;
        for n in -mu * group.level as i64..=mu * group.level as i64 {
            let h = &base * &GroupElement::t_pow(n);
            if table.coset_of(&h)? == target {
                debug_assert!(apply_moebius_boundary(&h, &BoundaryPoint::Infinity) == *p);
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// One letter of a word in the Schreier generators: generator index and
/// whether its inverse is meant.
pub type GenLetter = (usize, bool);

/// Schreier generators of `Γ` relative to the coset table, together with the
/// rewritten relators of SL(2, Z) = ⟨S, T | S^4, S^2 (ST)^{-3}⟩.
#[derive(Clone, Debug)]
pub struct Presentation {
    generators: Vec<GroupElement>,
    gen_of: Vec<[Option<usize>; 2]>,
    relations: Vec<Vec<GenLetter>>,
}

impl Presentation {
    pub fn new(table: &CosetTable) -> Self {
        let mut generators = Vec::new();
        let mut gen_of = vec![[None, None]; table.index()];
        #[allow(clippy::needless_range_loop)]
        for i in 0..table.index() {
            for (slot, letter) in [Letter::S, Letter::T].into_iter().enumerate() {
                let j = table.step(i, letter);
                let s = &(&table.reps()[i] * &letter.matrix()) * &table.reps()[j].inverse();
                if !s.is_identity() {
                    generators.push(s);
                    gen_of[i][slot] = Some(generators.len() - 1);
                }
            }
        }
        let mut pres = Self {
            generators,
            gen_of,
            relations: Vec::new(),
        };
        let mut s2_st3 = vec![Letter::S, Letter::S];
        for _ in 0..3 {
            s2_st3.extend([Letter::TInv, Letter::S, Letter::S, Letter::S]);
        }
        let relators = [vec![Letter::S; 4], s2_st3];
        for start in 0..table.index() {
            for rel in &relators {
                let (word, end) = pres.walk(table, start, rel);
                debug_assert_eq!(end, start);
                pres.relations.push(word);
            }
        }
        pres
    }

    fn walk(
        &self,
        table: &CosetTable,
        start: usize,
        letters: &[Letter],
    ) -> (Vec<GenLetter>, usize) {
        let mut i = start;
        let mut out = Vec::new();
        for &l in letters {
            match l {
                Letter::S | Letter::T => {
                    let slot = if l == Letter::S { 0 } else { 1 };
                    if let Some(g) = self.gen_of[i][slot] {
                        out.push((g, false));
                    }
                    i = table.step(i, l);
                }
                Letter::TInv => {
                    let j = table.step(i, Letter::TInv);
                    if let Some(g) = self.gen_of[j][1] {
                        out.push((g, true));
                    }
                    i = j;
                }
            }
        }
        (out, i)
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn relations(&self) -> &[Vec<GenLetter>] {
        &self.relations
    }

    /// Rewrites `γ ∈ Γ` as a word in the Schreier generators; the product of
    /// the word equals `γ` exactly.
    pub fn rewrite(&self, table: &CosetTable, gamma: &GroupElement) -> Result<Vec<GenLetter>> {
        let group = table.group();
        if !group.contains(gamma) {
            return Err(Error::NotInGroup {
                element: gamma.to_string(),
                group: group.to_string(),
            });
        }
        let (word, end) = self.walk(table, 0, &gamma.word());
        if end != 0 {
            return Err(Error::Internal(format!(
                "rewriting {gamma} did not return to Γ"
            )));
        }
        Ok(word)
    }

    pub fn evaluate_word(&self, word: &[GenLetter]) -> GroupElement {
        word.iter()
            .fold(GroupElement::identity(), |acc, &(g, inv)| {
                let m = if inv {
                    self.generators[g].inverse()
                } else {
                    self.generators[g].clone()
                };
                &acc * &m
            })
    }

    /// Integer basis of the homomorphisms `Γ → Z`, as vectors of values on
    /// the Schreier generators.
    pub fn integer_homomorphisms(&self) -> Vec<Vec<i64>> {
        let cols = self.generators.len();
        let mut rows: Vec<Vec<BigRational>> = self
            .relations
            .iter()
            .map(|rel| {
                let mut row = vec![BigRational::zero(); cols];
                for &(g, inv) in rel {
                    row[g] += BigRational::from_integer(if inv { -1 } else { 1 }.into());
                }
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let pivot = rows[r][c].clone();
            for x in rows[r].iter_mut() {
                *x = &*x / &pivot;
            }
            for i in 0..rows.len() {
                if i != r && !rows[i][c].is_zero() {
                    let f = rows[i][c].clone();
                    #[allow(clippy::needless_range_loop)]
                    for cc in 0..cols {
                        let v = &rows[r][cc] * &f;
                        rows[i][cc] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let mut basis = Vec::new();
        for free in (0..cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![BigRational::zero(); cols];
            v[free] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[row][free].clone();
            }
            let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            basis.push(
                v.iter()
                    .map(|x| {
                        (x * BigRational::from_integer(lcm.clone()))
                            .to_integer()
                            .to_i64()
                            .unwrap_or(0)
                    })
                    .collect(),
            );
        }
        basis
    }

    /// Checks that integer values on the generators kill every relation.
    pub fn respects_relations(&self, phi: &[i64]) -> bool {
        self.relations.iter().all(|rel| {
            rel.iter()
                .map(|&(g, inv)| if inv { -phi[g] } else { phi[g] })
                .sum::<i64>()
                == 0
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(a: i64, b: i64, c: i64, d: i64) -> GroupElement {
        GroupElement::from_i64(a, b, c, d).unwrap()
    }

    #[test]
    fn membership_examples() {
        let g2 = CongruenceSubgroup::gamma0(2);
        assert!(g2.contains(&GroupElement::t()));
        assert!(!g2.contains(&GroupElement::s()));
        assert!(CongruenceSubgroup::full().contains(&g(5, 3, 3, 2)));
        let g1 = CongruenceSubgroup::new(SubgroupKind::Gamma1, 5).unwrap();
        assert!(g1.contains(&g(1, 1, 5, 6)));
        assert!(!g1.contains(&g(-1, 0, 0, -1)));
        let gn = CongruenceSubgroup::new(SubgroupKind::Gamma, 3).unwrap();
        assert!(!gn.contains(&GroupElement::t()));
        assert!(gn.contains(&GroupElement::t_pow(3)));
    }

    #[test]
    fn coset_tables_have_expected_sizes() {
        assert_eq!(
            CosetTable::new(CongruenceSubgroup::full()).unwrap().index(),
            1
        );
        assert_eq!(
            CosetTable::new(CongruenceSubgroup::gamma0(2))
                .unwrap()
                .index(),
            3
        );
        assert_eq!(
            CosetTable::new(CongruenceSubgroup::gamma0(4))
                .unwrap()
                .index(),
            6
        );
        for (kind, n, mu) in [
            (SubgroupKind::Gamma1, 4, 12),
            (SubgroupKind::Gamma1, 5, 24),
            (SubgroupKind::Gamma, 2, 6),
            (SubgroupKind::Gamma, 3, 24),
        ] {
            let t = CosetTable::new(CongruenceSubgroup::new(kind, n).unwrap()).unwrap();
            assert_eq!(t.index(), mu, "{kind:?}({n})");
        }
    }

    #[test]
    fn first_rep_is_identity() {
        let t = CosetTable::new(CongruenceSubgroup::gamma0(6)).unwrap();
        assert!(t.reps()[0].is_identity());
        let (j, gamma) = t.coset_index_of(&GroupElement::t()).unwrap();
        assert_eq!(j, 0);
        assert_eq!(gamma, GroupElement::t());
        let (j, gamma) = t.coset_index_of(&t.reps()[2]).unwrap();
        assert_eq!(j, 2);
        assert!(gamma.is_identity());
    }

    #[test]
    fn cusps_of_small_levels() {
        let full = cusps(&CosetTable::new(CongruenceSubgroup::full()).unwrap()).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].q, BoundaryPoint::Infinity);
        assert_eq!(full[0].width, 1);

        let c2 = cusps(&CosetTable::new(CongruenceSubgroup::gamma0(2)).unwrap()).unwrap();
        let got: Vec<_> = c2.iter().map(|c| (c.q.to_string(), c.width)).collect();
        assert_eq!(got, vec![("inf".to_string(), 1), ("0".to_string(), 2)]);

        let c4 = cusps(&CosetTable::new(CongruenceSubgroup::gamma0(4)).unwrap()).unwrap();
        let got: Vec<_> = c4.iter().map(|c| (c.q.to_string(), c.width)).collect();
        assert_eq!(
            got,
            vec![
                ("inf".to_string(), 1),
                ("0".to_string(), 4),
                ("1/2".to_string(), 1)
            ]
        );
    }

    #[test]
    fn cusp_invariants_hold_exactly() {
        for n in [1, 2, 3, 4, 6, 8, 12] {
            let table = CosetTable::new(CongruenceSubgroup::gamma0(n)).unwrap();
            let cs = cusps(&table).unwrap();
            assert_eq!(
                cs.iter().map(|c| c.width).sum::<u64>(),
                table.index() as u64,
                "N={n}"
            );
            for c in &cs {
                assert_eq!(BoundaryPoint::cusp_of(&c.scaling), c.q);
                let conj = &(&c.scaling.inverse() * &c.stabilizer) * &c.scaling;
                assert_eq!(conj, GroupElement::t_pow(c.width as i64));
                assert!(table.group().contains(&c.stabilizer));
            }
            for (i, p) in cs.iter().enumerate() {
                for q in &cs[i + 1..] {
                    assert!(!cusps_equivalent(&table, &p.q, &q.q).unwrap());
                }
            }
        }
    }

    #[test]
    fn equivalent_rationals_are_detected() {
        let table = CosetTable::new(CongruenceSubgroup::gamma0(4)).unwrap();
        assert!(cusps_equivalent(
            &table,
            &BoundaryPoint::rational(1, 4),
            &BoundaryPoint::Infinity
        )
        .unwrap());
        assert!(cusps_equivalent(
            &table,
            &BoundaryPoint::rational(1, 3),
            &BoundaryPoint::rational(0, 1)
        )
        .unwrap());
        assert!(!cusps_equivalent(
            &table,
            &BoundaryPoint::rational(1, 2),
            &BoundaryPoint::rational(0, 1)
        )
        .unwrap());
    }

    #[test]
    fn lifted_rows_are_reduced() {
        let m = lift_bottom_row(&BigInt::from(7), &BigInt::from(-3)).unwrap();
        assert_eq!(m.c(), &BigInt::from(7));
        assert_eq!(m.d(), &BigInt::from(-3));
        let [a, b, c, d] = m.entries_f64();
        assert!((a * c + b * d).abs() <= (c * c + d * d) / 2.0);
    }

    #[test]
    fn rewriting_reproduces_elements() {
        let table = CosetTable::new(CongruenceSubgroup::gamma0(4)).unwrap();
        let pres = Presentation::new(&table);
        for e in [
            g(1, 0, 4, 1),
            g(3, 1, 8, 3),
            g(-1, 0, 0, -1),
            g(5, 2, 12, 5),
            g(1, 7, 0, 1),
        ] {
            let w = pres.rewrite(&table, &e).unwrap();
            assert_eq!(pres.evaluate_word(&w), e);
        }
        assert!(pres.rewrite(&table, &GroupElement::s()).is_err());
        for rel in pres.relations() {
            assert!(pres.evaluate_word(rel).is_identity());
        }
    }

    #[test]
    fn homomorphisms_of_gamma0_4() {
        let table = CosetTable::new(CongruenceSubgroup::gamma0(4)).unwrap();
        let pres = Presentation::new(&table);
        let basis = pres.integer_homomorphisms();
        // Γ0(4)/±I is free of rank 2
        assert_eq!(basis.len(), 2);
        for phi in &basis {
            assert!(pres.respects_relations(phi));
        }
        let full = Presentation::new(&CosetTable::new(CongruenceSubgroup::full()).unwrap());
        assert!(full.integer_homomorphisms().is_empty());
    }
}
