use lplab::criteria::*;
use lplab::roots::{poly_roots, RootVerdict};
use lplab::series::{
    coeffs_from_quotients, quotients_from_coeffs, CoefficientSeries, QuotientSequence,
};
use proptest::prelude::*;

fn qs(q: &[f64]) -> QuotientSequence {
    quotients_from_coeffs(&coeffs_from_quotients(1.0, 1.0, q).unwrap()).unwrap()
}

fn theta(a: f64) -> CoefficientSeries {
    CoefficientSeries::partial_theta(a, 64).unwrap()
}

fn margin(v: &CriterionVerdict, name: &str) -> f64 {
    v.margins
        .get(name)
        .unwrap_or_else(|| panic!("{} has no margin {name}", v.criterion))
}

#[test]
fn newton_examples() {
    let e =
        newton_check(&quotients_from_coeffs(&CoefficientSeries::exponential(20).unwrap()).unwrap());
    assert!(e.holds() && e.has_flag("exponential-equality"));
    assert!(e.margins.iter().all(|(_, m)| m.abs() <= 1e-12));
    let t = newton_check(&quotients_from_coeffs(&theta(2.0)).unwrap());
    assert!(t.holds());
    assert!((margin(&t, "q3") - (4.0 - 1.5)).abs() < 1e-12);
    let f = newton_check(&qs(&[1.4, 1.6]));
    assert!(f.fails());
    assert_eq!(f.witness, Some(WitnessRecord::Index { n: 2 }));
}

#[test]
fn lemma_q2q3_examples() {
    let v = lemma_q2q3_check(4.0, 17.0);
    assert!(v.holds() && margin(&v, "q3(q2-4)+3") == 3.0);
    let v = lemma_q2q3_check(3.0, 3.0);
    assert!(v.holds() && margin(&v, "q3(q2-4)+3") == 0.0);
    let v = lemma_q2q3_check(2.0, 4.0);
    assert!(v.fails() && margin(&v, "q3(q2-4)+3") == -5.0 && v.has_flag("not-in-lp-i"));
}

#[test]
fn hutchinson_examples() {
    let v = hutchinson_check(&quotients_from_coeffs(&theta(2.0)).unwrap());
    assert!(v.holds());
    assert!(v.margins.iter().all(|(_, m)| m.abs() < 1e-12));
    assert!(hutchinson_check(
        &quotients_from_coeffs(&CoefficientSeries::exponential(20).unwrap()).unwrap()
    )
    .fails());
    assert!(hutchinson_check(&quotients_from_coeffs(&theta(2.1)).unwrap()).holds());
}

#[test]
fn monotone_classifier_examples() {
    let v = monotone_classify(&quotients_from_coeffs(&theta(1.9)).unwrap(), Some(3.61));
    assert!(v.holds(), "{v:?}");
    let e = CoefficientSeries::euler_like(3.0, 40).unwrap();
    let v = monotone_classify(&quotients_from_coeffs(&e).unwrap(), e.quotient_limit());
    assert!(v.fails() && v.has_flag("increasing") && v.has_flag("not-in-lp"));
    let x = CoefficientSeries::exponential(40).unwrap();
    let v = monotone_classify(&quotients_from_coeffs(&x).unwrap(), x.quotient_limit());
    assert_eq!(v.status, Status::Inconclusive);
}

#[test]
fn euler_like_quotients_follow_their_formula() {
    let e = CoefficientSeries::euler_like(3.0, 20).unwrap();
    let q = quotients_from_coeffs(&e).unwrap();
    for k in 2..=20 {
        let expected = (3f64.powi(k) + 1.0) / (3f64.powi(k - 1) + 1.0);
        assert!((q.q(k as usize).unwrap() - expected).abs() < 1e-12 * expected);
    }
}

#[test]
fn zero_segment_examples() {
    let v = thm1_zero_segment_check(&theta(2.0), 1024).unwrap();
    assert!(v.holds());
    match v.witness {
        Some(WitnessRecord::Point { x, value }) => {
            assert!((-4.0..=0.0).contains(&x));
            assert!(value <= -0.12, "{value}");
        }
        ref w => panic!("expected a point witness, got {w:?}"),
    }
    let v = thm1_zero_segment_check(&CoefficientSeries::exponential(30).unwrap(), 1024).unwrap();
    assert_eq!(v.status, Status::Inconclusive);
    assert!(v.computed.get("min_x").is_none());
}

#[test]
fn thm2_bound_examples() {
    assert!((thm2_bound(3.0).unwrap().bound - 3.0).abs() < 1e-12);
    let b = thm2_bound(3.5).unwrap();
    assert!((b.bound - (7.0 + 1.75f64.sqrt()) / 1.75).abs() < 1e-12);
    assert!((b.bound - 4.7560).abs() < 1e-4);
    assert!((b.remark_bound - 6.0).abs() < 1e-12);
    assert!(thm2_bound(3.99).unwrap().bound > 100.0);
    assert!(thm2_bound(4.0).is_err() && thm2_bound(2.9).is_err());
    assert_eq!(thm2_check(4.0, 3.0).status, Status::Inconclusive);
}

#[test]
fn thm3_check_examples() {
    let v = thm3_check(3.0, 2.5, 3.0);
    assert!(v.holds());
    assert!((margin(&v, "threshold-q3") - (8.0 / 3.0 - 2.5)).abs() < 1e-12);
    let v = thm3_check(3.5, 5.0, 3.5);
    assert!(v.fails());
    assert!((margin(&v, "threshold-q3") - (8.0 / 1.75 - 5.0)).abs() < 1e-12);
    assert_eq!(thm3_check(2.9, 2.5, 3.0).status, Status::Inconclusive);
}

#[test]
fn tail_bound_examples() {
    let b = tail_bound_lm2([4.0; 5]).unwrap();
    // 16 / (4^7 - 4^3)
    assert!((b.bound - 16.0 / 16320.0).abs() < 1e-15);
    assert!((b.gate_margin - 251.0).abs() < 1e-12);
    let b = tail_bound_lm2([2.0; 5]).unwrap();
    assert!((b.bound - 4.0 / 120.0).abs() < 1e-15);
    assert!((b.gate_margin - 13.0).abs() < 1e-12);
}

#[test]
fn apolar_root_examples() {
    for (q2, z4) in [(4.0, 0.0), (3.0, 3.0), (3.5, 1.5)] {
        let a = apolar_quartic(q2, 5.0, 5.0).unwrap();
        assert!(a
            .q_roots
            .iter()
            .any(|z| (z.re - z4).abs() < 1e-12 && z.im == 0.0));
        assert!(a.q_roots.iter().all(|z| z.norm() <= q2 + 1e-12));
        // q2 = 3 makes q2 a double root, resolved only to about sqrt(u) |z|
        assert!(a.root_crosscheck < 1e-6, "{}", a.root_crosscheck);
    }
}

#[test]
fn composite_reports() {
    let r = full_report(&theta(2.0)).unwrap();
    for name in [
        "newton",
        "hutchinson",
        "thm1_zero_segment",
        "truncation_real_rooted",
    ] {
        assert!(r.verdict(name).unwrap().holds(), "{name}");
    }
    let r = full_report(&CoefficientSeries::euler_like(3.0, 64).unwrap()).unwrap();
    assert!(r.verdict("monotone_classify").unwrap().fails());
    assert!(r.roots.as_ref().unwrap().nonreal_count() > 0);
    let r = full_report(&CoefficientSeries::exponential(64).unwrap()).unwrap();
    assert!(r
        .verdict("newton")
        .unwrap()
        .has_flag("exponential-equality"));
    assert!(r.verdict("hutchinson").unwrap().fails());
    assert_eq!(
        r.verdict("thm1_zero_segment").unwrap().status,
        Status::Inconclusive
    );
    assert!(r.numerical_error().is_none());
}

#[test]
fn necessary_witness_on_real_rooted_corpus() {
    // products of (1 + z/r) with negative zeros, theta sections and theta series
    let mut corpus: Vec<CoefficientSeries> =
        [1.8, 2.0, 2.5, 3.0].iter().map(|&a| theta(a)).collect();
    for roots in [
        vec![1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0],
        vec![1.0, 1.1, 10.0, 100.0, 1e3, 1e4],
        vec![1.0, 1.05, 12.0, 150.0, 2e3, 3e4],
        vec![1.0, 1.2, 15.0, 200.0, 3e3, 4e4, 5e5],
        vec![2.0, 2.1, 2.2, 2.3, 2.4, 2.5, 2.6],
    ] {
        let mut c = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &a) in c.iter().enumerate() {
                next[i] += a;
                next[i + 1] += a / r;
            }
            c = next;
        }
        corpus.push(CoefficientSeries::explicit(&c).unwrap());
    }
    let mut checked = 0;
    for s in &corpus {
        let q = quotients_from_coeffs(s).unwrap();
        let n = (0..=s.degree().min(40))
            .take_while(|&k| s.coefficient(k) > 1e-290)
            .last()
            .unwrap();
        let r = poly_roots(&s.section_coefficients(n, false)).unwrap();
        if r.verdict != RootVerdict::AllRealNegative || q.q[0] > q.q[1] * (1.0 + EQ_TOL) {
            continue;
        }
        checked += 1;
        let v = thm1_zero_segment_check(s, 1024).unwrap();
        assert!(v.witness.is_some(), "no witness for {:?}", &q.q[..3]);
    }
    assert!(
        checked >= 7,
        "only {checked} corpus members met the hypotheses"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn remark_chain(q2 in 3.0f64..4.0) {
        let b = thm2_bound(q2).unwrap();
        prop_assert!(3.0 <= b.bound && b.bound <= b.remark_bound);
        if q2 > 3.0 {
            prop_assert!(b.bound > 3.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn apolarity_residual_vanishes(i in 0usize..5, q3 in 1.01f64..8.0, q4 in 1.01f64..8.0) {
        let q2 = [3.0, 3.25, 3.5, 3.75, 4.0][i];
        let a = apolar_quartic(q2, q3, q4).unwrap();
        prop_assert!(a.apolarity_residual <= 1e-12, "{}", a.apolarity_residual);
    }

    #[test]
    fn hypothesis_gates_give_inconclusive(q2 in 0.5f64..2.999, q3 in 1.0f64..6.0, q4 in 1.0f64..6.0) {
        prop_assert_eq!(thm2_check(q2, q3).status, Status::Inconclusive);
        prop_assert_eq!(thm3_check(q2, q3, q4).status, Status::Inconclusive);
    }

    #[test]
    fn margin_sign_matches_status(q2 in 1.0f64..6.0, q3 in 1.0f64..12.0) {
        let v = lemma_q2q3_check(q2, q3);
        let m = margin(&v, "q3(q2-4)+3");
        prop_assert_eq!(v.holds(), m >= -EQ_TOL);
    }
}
