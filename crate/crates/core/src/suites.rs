//! Seeded randomized suites that check lemma conclusions numerically.
//!
//! Each suite draws its parameters from a `Pcg64` stream derived from the
//! run seed and the suite name, then evaluates the trials in parallel. Draws
//! happen before evaluation, so results do not depend on thread count.

use crate::criteria::{apolar_quartic, tail_bound_lm2, thm2_bound, Named};
use crate::error::{Error, Result};
use crate::roots::{count_series_zeros_in_disk, count_zeros_in_disk, min_modulus_on_circle};
use crate::series::coeffs_from_quotients;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Generator identity recorded in reports.
pub const RNG_ALGORITHM: &str = "pcg64 (PCG XSL RR 128/64, rand_pcg 0.3)";
/// Counterexamples kept per suite.
const MAX_COUNTEREXAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    /// Forces the lemma-1 parameter `a` for every trial.
    pub lemma1_a: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            trials: 1000,
            lemma1_a: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteStatus {
    Pass,
    Fail,
    /// no failures, but some draws fell outside the lemma's hypotheses
    DomainViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub status: SuiteStatus,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub domain_violations: usize,
    #[serde(serialize_with = "finite_or_null")]
    pub worst_margin: f64,
    pub worst_params: Named,
    pub counterexamples: Vec<Named>,
    pub summary: Named,
}

fn finite_or_null<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

/// Outcome of one trial.
pub enum Trial {
    Checked { margin: f64, params: Named },
    OutOfDomain { params: Named },
}

fn tally(name: &str, trials: Vec<Trial>, summary: Named) -> SuiteResult {
    let mut r = SuiteResult {
        suite: name.to_string(),
        status: SuiteStatus::Pass,
        trials: trials.len(),
        passed: 0,
        failed: 0,
        domain_violations: 0,
        worst_margin: f64::INFINITY,
        worst_params: Named::default(),
        counterexamples: Vec::new(),
        summary,
    };
    for t in trials {
        match t {
            Trial::OutOfDomain { params } => {
                r.domain_violations += 1;
                if r.counterexamples.len() < MAX_COUNTEREXAMPLES && r.failed == 0 {
                    let mut p = params;
                    p.push("out_of_domain", 1.0);
                    r.counterexamples.push(p);
                }
            }
            Trial::Checked { margin, params } => {
                if margin >= 0.0 {
                    r.passed += 1;
                } else {
                    r.failed += 1;
                    if r.counterexamples.len() < MAX_COUNTEREXAMPLES {
                        r.counterexamples.push(params.clone());
                    }
                }
                if margin < r.worst_margin || margin.is_nan() {
                    r.worst_margin = margin;
                    r.worst_params = params;
                }
            }
        }
    }
    r.status = if r.failed > 0 {
        SuiteStatus::Fail
    } else if r.domain_violations > 0 {
        SuiteStatus::DomainViolation
    } else {
        SuiteStatus::Pass
    };
    r
}

/// Stream for one suite: FNV-1a of the name mixed into the run seed.
pub fn suite_rng(seed: u64, name: &str) -> Pcg64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    Pcg64::seed_from_u64(seed ^ h)
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteResult>;
}

fn named(pairs: &[(&str, f64)]) -> Named {
    let mut n = Named::default();
    for &(k, v) in pairs {
        n.push(k, v);
    }
    n
}

/// The quartic `1 - z + z^2/a - z^3/(a^2 b) + z^4/(a^3 b^2 c)`.
pub fn lemma1_quartic(a: f64, b: f64, c: f64) -> [f64; 5] {
    [
        1.0,
        -1.0,
        1.0 / a,
        -1.0 / (a * a * b),
        1.0 / (a.powi(3) * b * b * c),
    ]
}

/// `min |P(a e^{it})| >= a / (b^2 c)` on `3 <= a < 4`, `b >= a`, `c >= 4/3`.
pub struct Lemma1CircleMinimum;

impl Suite for Lemma1CircleMinimum {
    fn name(&self) -> &'static str {
        "lemma1_circle_minimum"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteResult> {
        let mut rng = suite_rng(cfg.seed, self.name());
        let draws: Vec<(f64, f64, f64)> = (0..cfg.trials)
            .map(|_| {
                let a = rng.gen_range(3.0..4.0);
                let b = rng.gen_range(a..a + 6.0);
                let c = rng.gen_range(4.0 / 3.0..6.0);
                (cfg.lemma1_a.unwrap_or(a), b, c)
            })
            .collect();
        let trials: Vec<Trial> = draws
            .par_iter()
            .map(|&(a, b, c)| {
                let params = named(&[("a", a), ("b", b), ("c", c)]);
                if !((3.0..4.0).contains(&a) && b >= a && c >= 4.0 / 3.0) {
                    return Ok(Trial::OutOfDomain { params });
                }
                let m = min_modulus_on_circle(&lemma1_quartic(a, b, c), a)?;
                let bound = a / (b * b * c);
                let mut params = params;
                params.push("min_modulus", m.value);
                params.push("bound", bound);
                Ok(Trial::Checked {
                    margin: m.value - bound + 1e-10,
                    params,
                })
            })
            .collect::<Result<_>>()?;
        Ok(tally(self.name(), trials, Named::default()))
    }
}

pub const LEMMA2_DEGREE: usize = 60;
pub const LEMMA2_SAMPLES: usize = 2048;

/// `max |R_5(q2 e^{it}, phi)|` over `samples` equispaced angles for the
/// normalized series with quotients `q = [q_2, q_3, ...]`.
pub fn r5_max_on_circle(q: &[f64], samples: usize) -> Result<f64> {
    let s = coeffs_from_quotients(1.0, 1.0, q)?;
    let q2 = q[0];
    let ratios = s.ratios();
    let mut best: f64 = 0.0;
    for j in 0..samples {
        // phi(z) = f(-z)
        let z = -Complex64::from_polar(q2, TAU * j as f64 / samples as f64);
        let mut t = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &p) in ratios.iter().enumerate() {
            t = t * z / p;
            if k + 1 >= 5 {
                acc += t;
            }
        }
        best = best.max(acc.norm());
    }
    Ok(best)
}

/// `max |R_5| <= q2 q6 / (q3^3 q4^2 q5 q6 - q3^2 q4)` for `q_j` in `(1.5, 6)`.
pub struct Lemma2TailBound;

impl Suite for Lemma2TailBound {
    fn name(&self) -> &'static str {
        "lemma2_tail_bound"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteResult> {
        let mut rng = suite_rng(cfg.seed, self.name());
        let draws: Vec<Vec<f64>> = (0..cfg.trials)
            .map(|_| {
                (2..=LEMMA2_DEGREE)
                    .map(|_| rng.gen_range(1.5..6.0))
                    .collect()
            })
            .collect();
        let results: Vec<(Trial, f64)> = draws
            .par_iter()
            .map(|q| {
                let b = tail_bound_lm2([q[0], q[1], q[2], q[3], q[4]])?;
                let max = r5_max_on_circle(q, LEMMA2_SAMPLES)?;
                let params = named(&[
                    ("q2", q[0]),
                    ("q3", q[1]),
                    ("q4", q[2]),
                    ("q5", q[3]),
                    ("q6", q[4]),
                    ("max_r5", max),
                    ("bound", b.bound),
                    ("gate_margin", b.gate_margin),
                ]);
                Ok((
                    Trial::Checked {
                        margin: b.bound + 1e-10 - max,
                        params,
                    },
                    b.gate_margin,
                ))
            })
            .collect::<Result<_>>()?;
        let min_gate = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let trials = results.into_iter().map(|r| r.0).collect();
        let summary = named(&[
            ("min_gate_margin", min_gate),
            ("degree", LEMMA2_DEGREE as f64),
            ("samples", LEMMA2_SAMPLES as f64),
        ]);
        Ok(tally(self.name(), trials, summary))
    }
}

/// Apolarity residual and a root of `S_4(z, phi)` in `|z| <= q2`.
pub struct Lemma3Apolar;

impl Suite for Lemma3Apolar {
    fn name(&self) -> &'static str {
        "lemma3_apolar"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteResult> {
        let mut rng = suite_rng(cfg.seed, self.name());
        let draws: Vec<(f64, f64, f64)> = (0..cfg.trials)
            .map(|_| {
                (
                    rng.gen_range(3.0..=4.0),
                    rng.gen_range(1.0..6.0),
                    rng.gen_range(1.0..6.0),
                )
            })
            .collect();
        let trials: Vec<Trial> = draws
            .par_iter()
            .map(|&(q2, q3, q4)| {
                let a = apolar_quartic(q2, q3, q4)?;
                let params = named(&[
                    ("q2", q2),
                    ("q3", q3),
                    ("q4", q4),
                    ("residual", a.apolarity_residual),
                    ("s4_min_modulus", a.s4_min_modulus),
                ]);
                let margin = (1e-12 - a.apolarity_residual).min(q2 + 1e-8 - a.s4_min_modulus);
                Ok(Trial::Checked { margin, params })
            })
            .collect::<Result<_>>()?;
        Ok(tally(self.name(), trials, Named::default()))
    }
}

/// `3 <= thm2_bound(q2) <= 3 / (4 - q2)` on `[3, 4)`.
pub struct RemarkChain;

impl Suite for RemarkChain {
    fn name(&self) -> &'static str {
        "remark_chain"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteResult> {
        let mut rng = suite_rng(cfg.seed, self.name());
        let draws: Vec<f64> = (0..cfg.trials).map(|_| rng.gen_range(3.0..4.0)).collect();
        let trials: Vec<Trial> = draws
            .iter()
            .map(|&q2| {
                let b = thm2_bound(q2)?;
                let params = named(&[
                    ("q2", q2),
                    ("bound", b.bound),
                    ("remark_bound", b.remark_bound),
                ]);
                Ok(Trial::Checked {
                    margin: (b.bound - 3.0).min(b.remark_bound - b.bound),
                    params,
                })
            })
            .collect::<Result<_>>()?;
        let at3 = thm2_bound(3.0)?.bound;
        Ok(tally(self.name(), trials, named(&[("bound_at_3", at3)])))
    }
}

/// Draws admissible quotient data for the Rouché comparison: lemma-1 domain
/// for `q2, q3, q4`, `q_j` in `(1.5, 6)` beyond, strict tail-bound gate.
pub fn rouche_draws(seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = suite_rng(seed, "rouche_consistency");
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let q2 = rng.gen_range(3.0..4.0);
        let mut q = vec![
            q2,
            rng.gen_range(q2..q2 + 6.0),
            rng.gen_range(4.0 / 3.0..6.0),
        ];
        q.extend((5..=LEMMA2_DEGREE).map(|_| rng.gen_range(1.5..6.0)));
        if let Ok(b) = tail_bound_lm2([q[0], q[1], q[2], q[3], q[4]]) {
            if b.gate_margin > 0.0 && b.rouche_margin > 0.0 {
                out.push(q);
            }
        }
    }
    out
}

/// Zero counts of `phi` and `S_4(z, phi)` in `|z| < q2` agree.
pub struct RoucheConsistency;

impl Suite for RoucheConsistency {
    fn name(&self) -> &'static str {
        "rouche_consistency"
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteResult> {
        let draws = rouche_draws(cfg.seed, cfg.trials);
        let trials: Vec<Trial> = draws
            .par_iter()
            .map(|q| {
                let s = coeffs_from_quotients(1.0, 1.0, q)?;
                let q2 = q[0];
                let full = count_series_zeros_in_disk(&s, q2, s.degree() - 2)?;
                let s4 = count_zeros_in_disk(&s.section_coefficients(4, true), q2)?;
                let params = named(&[
                    ("q2", q[0]),
                    ("q3", q[1]),
                    ("q4", q[2]),
                    ("q5", q[3]),
                    ("q6", q[4]),
                    ("count_phi", full.count as f64),
                    ("count_s4", s4.count as f64),
                ]);
                let margin = if full.count == s4.count { 0.0 } else { -1.0 };
                Ok(Trial::Checked { margin, params })
            })
            .collect::<Result<_>>()?;
        Ok(tally(self.name(), trials, Named::default()))
    }
}

/// Named suites in report order.
#[derive(Clone)]
pub struct SuiteRegistry {
    entries: Vec<Arc<dyn Suite>>,
}

impl SuiteRegistry {
    /// The four lemma suites run by `verify-lemmas`.
    pub fn lemma_suites() -> Self {
        SuiteRegistry {
            entries: vec![
                Arc::new(Lemma1CircleMinimum),
                Arc::new(Lemma2TailBound),
                Arc::new(Lemma3Apolar),
                Arc::new(RemarkChain),
            ],
        }
    }

    pub fn register(&mut self, s: Arc<dyn Suite>) {
        match self.entries.iter().position(|e| e.name() == s.name()) {
            Some(i) => self.entries[i] = s,
            None => self.entries.push(s),
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Suite>> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "suite",
                name: name.to_string(),
            })
    }

    pub fn run_all(&self, cfg: &SuiteConfig) -> Result<Vec<SuiteResult>> {
        self.entries.iter().map(|s| s.run(cfg)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SuiteConfig {
        SuiteConfig {
            seed,
            trials: 40,
            lemma1_a: None,
        }
    }

    #[test]
    fn streams_differ_by_suite_and_repeat_by_seed() {
        let x: f64 = suite_rng(42, "a").gen();
        let y: f64 = suite_rng(42, "b").gen();
        let z: f64 = suite_rng(42, "a").gen();
        assert_ne!(x, y);
        assert_eq!(x, z);
    }

    #[test]
    fn lemma_suites_pass_on_small_runs() {
        for r in SuiteRegistry::lemma_suites().run_all(&small(7)).unwrap() {
            assert_eq!(
                r.status,
                SuiteStatus::Pass,
                "{}: {:?}",
                r.suite,
                r.counterexamples
            );
        }
    }

    #[test]
    fn injected_a_is_a_domain_violation() {
        let cfg = SuiteConfig {
            lemma1_a: Some(2.5),
            ..small(1)
        };
        let r = Lemma1CircleMinimum.run(&cfg).unwrap();
        assert_eq!(r.status, SuiteStatus::DomainViolation);
        assert_eq!(r.failed, 0);
        assert_eq!(r.domain_violations, 40);
    }

    #[test]
    fn rouche_counts_agree_on_a_few_draws() {
        let r = RoucheConsistency.run(&small(3)).unwrap();
        assert_eq!(r.failed, 0);
    }
}
