use lplab::series::*;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn log_uniform_coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.0f64..6.0, 3..=50)
        .prop_map(|e| e.into_iter().map(|x| 10f64.powf(x)).collect())
}

fn quotients_above_one() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.01f64..8.0, 2..=30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn coefficients_survive_a_quotient_round_trip(c in log_uniform_coeffs()) {
        let q = quotients_from_slice(&c).unwrap();
        let back = coeffs_from_quotients(q.a0, q.a1, &q.q).unwrap();
        for (k, &a) in c.iter().enumerate() {
            prop_assert!(rel(a, back.coefficient(k)) <= 1e-12, "k={k}: {a} vs {}", back.coefficient(k));
        }
    }

    #[test]
    fn normalization_keeps_second_quotients(c in log_uniform_coeffs()) {
        let s = CoefficientSeries::explicit(&c).unwrap();
        let g = s.normalize();
        prop_assert!(g.is_normalized());
        let (q, qg) = (quotients_from_coeffs(&s).unwrap(), quotients_from_coeffs(&g).unwrap());
        for (a, b) in q.q.iter().zip(&qg.q) {
            prop_assert!(rel(*a, *b) <= 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn alternating_value_sits_between_consecutive_partial_sums(q in quotients_above_one(), t in 0.0f64..=1.0) {
        let s = coeffs_from_quotients(1.0, 1.0, &q).unwrap();
        let x = 1.0 + 1e-9 + t * (q[0] - 1.0 - 1e-9);
        let v = alternating_evaluate(&s, x, 1e-16).unwrap().value;
        let alt: Vec<f64> = s.section_coefficients(s.degree(), true);
        let partial = |n: usize| {
            // direct Horner on the alternating section
            alt[..=n].iter().rev().fold(0.0, |acc, &c| acc * x + c)
        };
        let mut m = 0;
        while 2 * m + 2 <= s.degree() {
            let (odd, even) = (partial(2 * m + 1), partial(2 * m));
            let slack = 1e-12 * alt[..=2 * m + 1].iter().enumerate().map(|(k, c)| c.abs() * x.powi(k as i32)).sum::<f64>();
            prop_assert!(odd < v + slack && v < even + slack, "m={m}: {odd} < {v} < {even}");
            m += 1;
        }
    }

    #[test]
    fn term_chain_decreases_after_the_first(q2 in 4.0f64..8.0, rest in prop::collection::vec(1.01f64..8.0, 1..=25), t in 0.0f64..1.0) {
        let mut q = vec![q2];
        q.extend(rest);
        let s = coeffs_from_quotients(1.0, 1.0, &q).unwrap();
        let x = 1.0 + 1e-9 + t * (q2 - 1.0 - 2e-9);
        let terms: Vec<f64> = (0..=s.degree()).map(|k| s.coefficient(k) * x.powi(k as i32)).collect();
        prop_assert!(terms[0] < terms[1]);
        for k in 1..terms.len() - 1 {
            prop_assert!(terms[k + 1] < terms[k], "k={k}: {} !< {}", terms[k + 1], terms[k]);
        }
    }

    #[test]
    fn evaluation_is_deterministic(q in quotients_above_one(), x in -3.0f64..3.0) {
        let s = coeffs_from_quotients(1.0, 1.0, &q).unwrap();
        prop_assert_eq!(evaluate(&s, x, 1e-14).unwrap(), evaluate(&s, x, 1e-14).unwrap());
    }
}

#[test]
fn reconstruction_from_exponential_quotients_gives_factorials() {
    let q: Vec<f64> = (2..=5).map(|k| k as f64 / (k as f64 - 1.0)).collect();
    let s = coeffs_from_quotients(1.0, 1.0, &q).unwrap();
    let mut fact = 1.0;
    for k in 0..=5 {
        if k > 0 {
            fact *= k as f64;
        }
        assert!(rel(s.coefficient(k), 1.0 / fact) < 1e-15);
    }
}

#[test]
fn unit_quotients_give_unit_coefficients() {
    let s = coeffs_from_quotients(1.0, 1.0, &[1.0; 6]).unwrap();
    assert!((0..=7).all(|k| (s.coefficient(k) - 1.0).abs() < 1e-15));
}

#[test]
fn constant_quotient_four_gives_quarter() {
    let s = coeffs_from_quotients(1.0, 1.0, &[4.0; 4]).unwrap();
    assert_eq!(s.coefficient(2), 0.25);
    // a^{-k^2} family rescaled to a_0 = a_1 = 1 is 2^{-k(k-1)}
    for k in 0..=5i32 {
        assert!(rel(s.coefficient(k as usize), 2f64.powi(-(k * (k - 1)))) < 1e-15);
    }
}

#[test]
fn phi_of_normalized_theta_at_two() {
    // oracle: direct sum of (-2)^k 4^{-k(k-1)/2}
    let oracle: f64 = (0..40)
        .map(|k| (-2f64).powi(k) * 4f64.powf(-(k * (k - 1)) as f64 / 2.0))
        .sum();
    let g = CoefficientSeries::partial_theta(2.0, 64)
        .unwrap()
        .normalize();
    let r = alternating_evaluate(&g, 2.0, 1e-16).unwrap();
    assert!((r.value - oracle).abs() < 1e-15);
    assert!((r.value - (-0.121_124_208)).abs() < 1e-8 && r.upper() <= 0.0);
}

#[test]
fn exponential_sum_matches_e() {
    let s = CoefficientSeries::exponential(64).unwrap();
    let r = evaluate(&s, 1.0, 1e-12).unwrap();
    assert!((r.value - std::f64::consts::E).abs() < 1e-12);
}
