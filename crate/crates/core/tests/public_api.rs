//! Cross-module checks through the public API only.

use std::f64::consts::PI;
use std::sync::Arc;

use maass_lab::forms::{
    eisenstein_truncated, lift_holomorphic, verify_series_transformation, verify_transformation,
    QExpansion, Seed, SeriesSpec,
};
use maass_lab::modgroup::{
    apply_moebius, automorphy_phase, parse_word, reduce_to_fundamental_domain, GroupElement,
    UHPoint,
};
use maass_lab::multiplier::{eta_product, MultiplierDescriptor, MultiplierSystem};
use maass_lab::operators::{maass_fd, maass_on_basis, BasisTerm, Direction, Family};
use maass_lab::subgroup::{cusps, CongruenceSubgroup, CosetTable, SubgroupKind};
use maass_lab::vvforms::{lift_pi, project_pi};
use maass_lab::whittaker::{normalized_w, WhittakerParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pt(x: f64, y: f64) -> UHPoint {
    UHPoint { x, y }
}

#[test]
fn cusp_widths_add_up_to_the_index() {
    for kind in [
        SubgroupKind::Gamma0,
        SubgroupKind::Gamma1,
        SubgroupKind::Gamma,
    ] {
        for level in 1..=6 {
            let group = CongruenceSubgroup::new(kind, level).unwrap();
            let table = CosetTable::new(group).unwrap();
            assert_eq!(table.index() as u64, group.index(), "{group}");
            // without -I a regular cusp of width l covers 2l cosets; an irregular one (where
            // -T^{l/2} is conjugate into Γ) covers l
            let has_minus = group.contains(&GroupElement::neg_identity());
            let covered: u64 = cusps(&table)
                .unwrap()
                .iter()
                .map(|q| {
                    let half = GroupElement::t_pow(q.width as i64 / 2).neg();
                    let regular = q.width % 2 == 1
                        || !group.contains(&(&(&q.scaling * &half) * &q.scaling.inverse()));
                    if has_minus || !regular {
                        q.width
                    } else {
                        2 * q.width
                    }
                })
                .sum();
            assert_eq!(covered as usize, table.index(), "{group}");
        }
    }
}

#[test]
fn gamma0_indices_match_the_product_formula() {
    // N ∏_{p | N} (1 + 1/p)
    let expected = [1, 3, 4, 6, 6, 12, 8, 12, 12, 18, 12, 24];
    for (n, want) in (1..=12).zip(expected) {
        assert_eq!(
            CosetTable::new(CongruenceSubgroup::gamma0(n))
                .unwrap()
                .index(),
            want,
            "N = {n}"
        );
    }
}

#[test]
fn eta_multiplier_matches_the_eta_function() {
    let v = MultiplierSystem::eta(CongruenceSubgroup::full()).unwrap();
    let k = c(0.5, 0.0);
    // y^{1/4} η(z) transforms with v and the weight-1/2 phase
    let u = |z: UHPoint| z.y.powf(0.25) * eta_product(z.to_complex());
    for word in ["S", "T", "ST", "STS", "T^2 S T^-1", "S T^3 S T"] {
        let g = parse_word(word).unwrap();
        let z = pt(0.13, 1.1);
        let lhs = u(apply_moebius(&g, z)) / automorphy_phase(&g, z, k);
        let rhs = v.evaluate(&g).unwrap() * u(z);
        assert!(
            (lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()),
            "{word}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn multiplier_descriptor_round_trips_through_json() {
    let text = r#"{"group": {"kind": "gamma0", "level": 4}, "weight": [0.5, 0.0], "kind": "eta"}"#;
    let d: MultiplierDescriptor = serde_json::from_str(text).unwrap();
    let v = d.build().unwrap();
    let direct = MultiplierSystem::eta(CongruenceSubgroup::gamma0(4)).unwrap();
    for word in ["T", "S T^4 S^3", "S T^-4 S^3 T^2"] {
        let g = parse_word(word).unwrap();
        if v.group().contains(&g) {
            assert!((v.evaluate(&g).unwrap() - direct.evaluate(&g).unwrap()).norm() < 1e-14);
        }
    }
    let back: MultiplierDescriptor =
        serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(back, d);
}

#[test]
fn w_tilde_at_nu_half_is_an_exponential() {
    // K_{1/2}(t) = sqrt(π/2t) e^{-t}, so √(y/π) K_{1/2}(y/2) = e^{-y/2}
    for y in [0.7, 3.0, 11.0] {
        let w = normalized_w(WhittakerParams::real(0.0, 0.5), y).unwrap();
        assert!((w.value - c((-y / 2.0f64).exp(), 0.0)).norm() < 1e-13);
    }
}

#[test]
fn closed_rules_agree_with_differences() {
    let t = BasisTerm::new(1.0, 1.0, c(0.2, 0.4), c(0.5, 0.1), Family::Wtilde).unwrap();
    let z = pt(0.2, 0.15);
    for dir in [Direction::Up, Direction::Down] {
        let (target, factor) = maass_on_basis(&t, dir).unwrap();
        assert_eq!(target.nu, t.nu);
        let shift = if dir == Direction::Up { 2.0 } else { -2.0 };
        assert!((target.k - t.k - shift).norm() < 1e-15);
        let exact = factor * target.eval(z).unwrap();
        let fd = maass_fd(dir, &t.evaluator(), t.k, z, 1e-3).unwrap();
        assert!(
            (fd - exact).norm() < 1e-5 * (1.0 + exact.norm()),
            "{dir:?}: {fd} vs {exact}"
        );
    }
}

#[test]
fn eisenstein_series_is_modular_within_its_tail() {
    let v = Arc::new(MultiplierSystem::trivial(CongruenceSubgroup::full()).unwrap());
    let spec = SeriesSpec::new(Seed::Power { nu: c(1.5, 0.0) }, v, 40.0).unwrap();
    let samples = [
        (GroupElement::s(), pt(0.2, 1.3)),
        (GroupElement::t(), pt(-0.4, 0.9)),
        (parse_word("ST").unwrap(), pt(0.1, 1.0)),
    ];
    for check in verify_series_transformation(&spec, &samples).unwrap() {
        assert!(
            check.residual <= check.budget,
            "{} > {}",
            check.residual,
            check.budget
        );
    }
    let at_i = eisenstein_truncated(&spec, pt(0.0, 1.0)).unwrap();
    assert!(at_i.value.re > 1.0 && at_i.tail_bound < 1e-2 && at_i.terms > 100);
}

fn lifted_e4() -> maass_lab::forms::GeneralizedMaassForm {
    let k = c(4.0, 0.0);
    let v = MultiplierSystem::trivial_with_weight(CongruenceSubgroup::full(), k).unwrap();
    lift_holomorphic(QExpansion::eisenstein(4, 60).unwrap(), k, Arc::new(v)).unwrap()
}

#[test]
fn lifted_forms_survive_deep_points() {
    let u = lifted_e4();
    // points far down in the cusp 0 need the group action, not more q-terms
    let samples: Vec<_> = [pt(0.31, 0.02), pt(-0.47, 0.005), pt(0.123, 0.05)]
        .into_iter()
        .map(|z| (GroupElement::s(), z))
        .collect();
    assert!(verify_transformation(&u, &samples).unwrap() < 1e-10);
}

#[test]
fn lift_and_project_are_inverse_on_gamma0_3() {
    let group = CongruenceSubgroup::gamma0(3);
    let u = lifted_e4().restrict(group).unwrap();
    let table = Arc::new(CosetTable::new(group).unwrap());
    let vu = lift_pi(&u, Arc::clone(&table)).unwrap();
    assert_eq!(vu.dimension(), 4);
    let back = project_pi(&vu, Arc::clone(&u.multiplier), &table).unwrap();
    for z in [pt(0.1, 0.8), pt(-0.3, 1.7)] {
        assert_eq!(u.eval(z).unwrap(), back.eval(z).unwrap());
    }
    let samples = [
        (GroupElement::s(), pt(0.2, 1.1)),
        (parse_word("T S T").unwrap(), pt(-0.1, 0.9)),
    ];
    assert!(vu.transformation_residual(&samples).unwrap() < 1e-10);
}

fn word() -> impl Strategy<Value = GroupElement> {
    prop::collection::vec(0u8..3, 0..8).prop_map(|letters| {
        let text: String = letters
            .iter()
            .map(|l| ['S', 'T', 't'][*l as usize])
            .collect();
        parse_word(&text).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moebius_action_is_a_group_action(g in word(), h in word(), x in -2.0..2.0f64, y in 0.2..3.0f64) {
        let z = pt(x, y);
        let lhs = apply_moebius(&(&g * &h), z);
        let rhs = apply_moebius(&g, apply_moebius(&h, z));
        let scale = 1.0 + lhs.x.abs() + lhs.y;
        prop_assert!((lhs.x - rhs.x).abs() < 1e-9 * scale && (lhs.y - rhs.y).abs() < 1e-9 * scale);
    }

    #[test]
    fn reduction_lands_in_the_standard_domain(x in -50.0..50.0f64, y in 1e-4..5.0f64) {
        let (g, w) = reduce_to_fundamental_domain(pt(x, y));
        prop_assert!(w.x.abs() <= 0.5 + 1e-9);
        prop_assert!(w.x * w.x + w.y * w.y >= 1.0 - 1e-9);
        prop_assert_eq!(g.entries_f64().len(), 4);
    }

    #[test]
    fn cosets_are_stable_under_right_multiplication(g in word(), level in 2u64..7) {
        let table = CosetTable::new(CongruenceSubgroup::gamma0(level)).unwrap();
        for rep in table.reps() {
            let (j, gamma) = table.coset_index_of(&(rep * &g)).unwrap();
            prop_assert!(table.group().contains(&gamma));
            prop_assert_eq!(&(&gamma * &table.reps()[j]), &(rep * &g));
        }
    }

    #[test]
    fn eta_consistency_holds_on_gamma0_2(g in word(), h in word()) {
        let v = MultiplierSystem::eta(CongruenceSubgroup::full()).unwrap();
        let k = v.weight();
        let z = pt(0.17, 1.3);
        let arg = |w: Complex64| w.im.atan2(w.re);
        // v(gh) = v(g) v(h) e^{ik[arg(j_g(hz)) + arg(j_h(z)) - arg(j_gh(z))]}
        let gh = &g * &h;
        let omega = (Complex64::i() * k * (arg(g.denominator_at(apply_moebius(&h, z))) + arg(h.denominator_at(z))
            - arg(gh.denominator_at(z)))).exp();
        let lhs = v.evaluate(&gh).unwrap();
        let rhs = v.evaluate(&g).unwrap() * v.evaluate(&h).unwrap() * omega;
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn w_tilde_decays_like_its_asymptote(y in 30.0..60.0f64, nu in 0.0..0.9f64) {
        let w = normalized_w(WhittakerParams::real(0.0, nu), y).unwrap().value;
        let lead = (-y / 2.0f64).exp();
        prop_assert!((w.norm() / lead - 1.0).abs() < (0.25 - nu * nu).abs() / y + 1e-3);
        prop_assert!(w.im.abs() < 1e-12 * lead);
    }
}

#[test]
fn phases_follow_the_principal_argument() {
    // -I acts trivially on ℍ but contributes arg(-1) = π
    let minus = parse_word("S^2").unwrap();
    let z = pt(0.3, 0.8);
    let phase = automorphy_phase(&minus, z, c(0.5, 0.0));
    assert!((phase - Complex64::from_polar(1.0, PI / 2.0)).norm() < 1e-15);
}
