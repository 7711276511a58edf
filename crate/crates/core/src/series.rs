//! Entire functions with positive Taylor coefficients, materialized to a
//! finite degree.
//!
//! A series is stored as its constant term `a_0` together with the first
//! quotients `p_n = a_{n-1} / a_n`, `n = 1..=N`. Fast-decaying families such
//! as `sum z^k a^{-k^2}` reach coefficients far below the binary64 range long
//! before their ratios overflow, so evaluation runs the term recurrence
//! `t_k = t_{k-1} * x / p_k` and never forms `a_k` directly.

use crate::error::{Error, Result};
use crate::precision::{DoubleDouble, Precision};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Default materialization degree for generated families.
pub const DEFAULT_DEGREE: usize = 64;

/// Where the coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Explicit,
    FromQuotients,
    /// `a_k = 1/k!`
    Exponential,
    /// `a_k = a^{-k^2}`, `a > 1`
    PartialTheta {
        a: f64,
    },
    /// `a_k = 1 / prod_{j=1..k} (a^j + 1)`, `a > 1`
    EulerLike {
        a: f64,
    },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Explicit => "explicit",
            Family::FromQuotients => "from-quotients",
            Family::Exponential => "exponential",
            Family::PartialTheta { .. } => "partial-theta",
            Family::EulerLike { .. } => "euler-like",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSeries {
    family: Family,
    a0: f64,
    /// `p_1..=p_N`
    ratios: Vec<f64>,
    /// When set the series is exactly this polynomial; otherwise it is the
    /// leading part of an entire function and evaluation certifies a tail.
    polynomial: bool,
    normalized: bool,
}

fn check_family_parameter(a: f64) -> Result<()> {
    if a.is_finite() && a > 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "family parameter a = {a} must satisfy a > 1"
        )))
    }
}

fn check_degree(degree: usize) -> Result<()> {
    if degree >= 1 {
        Ok(())
    } else {
        Err(Error::invalid("degree must be at least 1"))
    }
}

impl CoefficientSeries {
    /// Builds a series from explicit coefficients `a_0..=a_N`.
    pub fn explicit(coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::invalid("at least two coefficients are required"));
        }
        for (index, &value) in coeffs.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveCoefficient { index, value });
            }
        }
        let ratios = coeffs.windows(2).map(|w| w[0] / w[1]).collect();
        Ok(CoefficientSeries {
            family: Family::Explicit,
            a0: coeffs[0],
            ratios,
            polynomial: false,
            normalized: false,
        })
    }

    pub fn exponential(degree: usize) -> Result<Self> {
        check_degree(degree)?;
        Ok(CoefficientSeries {
            family: Family::Exponential,
            a0: 1.0,
            ratios: (1..=degree).map(|k| k as f64).collect(),
            polynomial: false,
            normalized: false,
        })
    }

    pub fn partial_theta(a: f64, degree: usize) -> Result<Self> {
        check_family_parameter(a)?;
        check_degree(degree)?;
        // p_k = a^{2k-1}; the recurrence keeps q_k = p_k / p_{k-1} within an ulp of a^2
        let a2 = a * a;
        let mut ratios = Vec::with_capacity(degree);
        let mut p = a;
        for _ in 0..degree {
            ratios.push(p);
            p *= a2;
        }
        Ok(CoefficientSeries {
            family: Family::PartialTheta { a },
            a0: 1.0,
            ratios,
            polynomial: false,
            normalized: false,
        })
    }

    pub fn euler_like(a: f64, degree: usize) -> Result<Self> {
        check_family_parameter(a)?;
        check_degree(degree)?;
        let ratios = (1..=degree).map(|k| a.powi(k as i32) + 1.0).collect();
        Ok(CoefficientSeries {
            family: Family::EulerLike { a },
            a0: 1.0,
            ratios,
            polynomial: false,
            normalized: false,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a1(&self) -> f64 {
        self.a0 / self.ratios[0]
    }

    /// `p_k = a_{k-1} / a_k` for `1 <= k <= N`.
    pub fn ratio(&self, k: usize) -> f64 {
        assert!(k >= 1 && k <= self.degree(), "ratio index {k} out of range");
        self.ratios[k - 1]
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Materialized coefficients. Entries below the binary64 range read as 0.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree() + 1);
        let mut c = self.a0;
        out.push(c);
        for &p in &self.ratios {
            c /= p;
            out.push(c);
        }
        out
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        assert!(k <= self.degree(), "coefficient index {k} out of range");
        self.ratios[..k].iter().fold(self.a0, |c, &p| c / p)
    }

    /// `ln a_k`, finite even where `a_k` itself underflows.
    pub fn log_coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree() + 1);
        let mut l = self.a0.ln();
        out.push(l);
        for &p in &self.ratios {
            l -= p.ln();
            out.push(l);
        }
        out
    }

    /// Coefficients of `S_n(z, f)`; with `alternating`, of `S_n(z, phi)` for
    /// `phi(z) = f(-z)`.
    pub fn section_coefficients(&self, n: usize, alternating: bool) -> Vec<f64> {
        let mut c = self.coefficients();
        c.truncate(n + 1);
        if alternating {
            for (k, v) in c.iter_mut().enumerate() {
                if k % 2 == 1 {
                    *v = -*v;
                }
            }
        }
        c
    }

    /// The section `S_n` as an exact polynomial series.
    pub fn section(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.degree() {
            return Err(Error::invalid(format!(
                "section degree {n} outside 1..={}",
                self.degree()
            )));
        }
        Ok(CoefficientSeries {
            ratios: self.ratios[..n].to_vec(),
            polynomial: true,
            ..self.clone()
        })
    }

    /// Treats the materialized coefficients as the whole function.
    pub fn into_polynomial(mut self) -> Self {
        self.polynomial = true;
        self
    }

    /// `g(x) = a_0^{-1} f(a_0 a_1^{-1} x)`, so `g_0 = g_1 = 1`; every `q_n` is kept.
    pub fn normalize(&self) -> Self {
        let p1 = self.ratios[0];
        let mut ratios: Vec<f64> = self.ratios.iter().map(|&p| p / p1).collect();
        ratios[0] = 1.0;
        CoefficientSeries {
            a0: 1.0,
            ratios,
            normalized: true,
            ..self.clone()
        }
    }

    /// Closed-form `lim q_n` for the generated families.
    pub fn quotient_limit(&self) -> Option<f64> {
        match self.family {
            Family::Exponential => Some(1.0),
            Family::PartialTheta { a } => Some(a * a),
            Family::EulerLike { a } => Some(a),
            Family::Explicit | Family::FromQuotients => None,
        }
    }
}

/// `p_1..=p_N` and `q_2..=q_N` of a series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientSequence {
    pub a0: f64,
    pub a1: f64,
    /// `p[0] = p_1`
    pub p: Vec<f64>,
    /// `q[0] = q_2`
    pub q: Vec<f64>,
}

impl QuotientSequence {
    /// `q_n` for `n >= 2`.
    pub fn q(&self, n: usize) -> Option<f64> {
        n.checked_sub(2).and_then(|i| self.q.get(i).copied())
    }

    pub fn p(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.p.get(i).copied())
    }

    /// Largest index `n` with a materialized `q_n`.
    pub fn last_index(&self) -> usize {
        self.q.len() + 1
    }

    /// `(n, q_n)` pairs.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.q.iter().enumerate().map(|(i, &v)| (i + 2, v))
    }
}

pub fn quotients_from_coeffs(s: &CoefficientSeries) -> Result<QuotientSequence> {
    if s.degree() < 2 {
        return Err(Error::invalid(format!(
            "quotients need degree >= 2, series has degree {}",
            s.degree()
        )));
    }
    let p = s.ratios.clone();
    let q = p.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(QuotientSequence {
        a0: s.a0,
        a1: s.a1(),
        p,
        q,
    })
}

/// Quotients straight from a coefficient slice.
pub fn quotients_from_slice(coeffs: &[f64]) -> Result<QuotientSequence> {
    quotients_from_coeffs(&CoefficientSeries::explicit(coeffs)?)
}

/// Rebuilds a series from `a_0`, `a_1` and `q_2..=q_N`.
pub fn coeffs_from_quotients(a0: f64, a1: f64, q: &[f64]) -> Result<CoefficientSeries> {
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(Error::NonPositiveCoefficient {
            index: 0,
            value: a0,
        });
    }
    if !(a1 > 0.0 && a1.is_finite()) {
        return Err(Error::NonPositiveCoefficient {
            index: 1,
            value: a1,
        });
    }
    let mut ratios = Vec::with_capacity(q.len() + 1);
    let mut p = a0 / a1;
    ratios.push(p);
    for (i, &v) in q.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveQuotient {
                index: i + 2,
                value: v,
            });
        }
        p *= v;
        ratios.push(p);
    }
    Ok(CoefficientSeries {
        family: Family::FromQuotients,
        a0,
        ratios,
        polynomial: false,
        normalized: false,
    })
}

/// How the reported tail estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailBound {
    /// Polynomial summed in full.
    Exact,
    /// Alternating terms non-increasing in magnitude from the cutoff on.
    Leibniz,
    /// Term ratios bounded by `ratio < 1` from the cutoff on.
    Geometric { ratio: f64 },
    /// No decay at the materialized degree; `tail_estimate` is only the last term.
    Uncertain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: f64,
    /// Bound on the floating-point error of `value` as a sum of the kept terms.
    pub rounding_bound: f64,
    pub truncation_degree: usize,
    pub tail_estimate: f64,
    pub tail: TailBound,
    /// `tail_estimate <= eps`
    pub converged: bool,
    /// Consecutive partial sums enclosing the sum (Leibniz case only).
    pub bracket: Option<(f64, f64)>,
}

impl EvalResult {
    pub fn is_certified(&self) -> bool {
        self.tail != TailBound::Uncertain
    }

    /// Upper end of the certified enclosure of the sum.
    pub fn upper(&self) -> f64 {
        self.value + self.tail_estimate + self.rounding_bound
    }

    pub fn lower(&self) -> f64 {
        self.value - self.tail_estimate - self.rounding_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexEvalResult {
    pub value: Complex64,
    pub truncation_degree: usize,
    pub tail_estimate: f64,
    pub tail: TailBound,
    pub converged: bool,
}

/// Magnitudes `|t_k| = a_k |x|^k` by recurrence.
fn term_magnitudes(s: &CoefficientSeries, ax: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.degree() + 1);
    let mut t = s.a0;
    out.push(t);
    for &p in &s.ratios {
        t = t * ax / p;
        out.push(t);
    }
    out
}

/// Tail of the terms after the cutoff `n`: `(bound, kind)`, or `None` when
/// decay cannot be verified on the materialized window.
fn certify_tail(
    s: &CoefficientSeries,
    mags: &[f64],
    ax: f64,
    n: usize,
    alternating: bool,
) -> Option<(f64, TailBound)> {
    let top = s.degree();
    if ax == 0.0 {
        return Some((0.0, TailBound::Geometric { ratio: 0.0 }));
    }
    if n + 2 > top {
        return None;
    }
    // r_k = |t_k / t_{k-1}| = |x| / p_k for k in n+2..=N
    let rho = s.ratios[n + 1..]
        .iter()
        .map(|&p| ax / p)
        .fold(0.0_f64, f64::max);
    let next = mags[n + 1];
    if alternating && rho <= 1.0 && ax / s.ratios[top - 1] < 1.0 {
        return Some((next, TailBound::Leibniz));
    }
    if rho < 1.0 {
        return Some((next / (1.0 - rho), TailBound::Geometric { ratio: rho }));
    }
    None
}

enum Cutoff {
    Certified {
        n: usize,
        bound: f64,
        kind: TailBound,
        converged: bool,
    },
    Uncertain,
}

fn choose_cutoff(
    s: &CoefficientSeries,
    mags: &[f64],
    ax: f64,
    start: usize,
    eps: f64,
    alternating: bool,
) -> Cutoff {
    let mut best: Option<(usize, f64, TailBound)> = None;
    for n in start..=s.degree() {
        if let Some((bound, kind)) = certify_tail(s, mags, ax, n, alternating) {
            if bound <= eps {
                return Cutoff::Certified {
                    n,
                    bound,
                    kind,
                    converged: true,
                };
            }
            if best.is_none_or(|(_, b, _)| bound < b) {
                best = Some((n, bound, kind));
            }
        }
    }
    match best {
        Some((n, bound, kind)) => Cutoff::Certified {
            n,
            bound,
            kind,
            converged: false,
        },
        None => Cutoff::Uncertain,
    }
}

/// Sum of `t_k` for `k = start..=end` in the requested arithmetic, with a
/// bound on the accumulated rounding error.
fn sum_terms(
    s: &CoefficientSeries,
    x: f64,
    start: usize,
    end: usize,
    precision: Precision,
) -> (f64, f64) {
    const U: f64 = f64::EPSILON / 2.0;
    match precision {
        Precision::Double => {
            let mut t = s.a0;
            let mut acc = if start == 0 { t } else { 0.0 };
            let mut abs = acc.abs();
            for k in 1..=end {
                t = t * x / s.ratios[k - 1];
                if k >= start {
                    acc += t;
                    abs += t.abs();
                }
            }
            // each term carries 2k roundings from the recurrence, the sum end + 1 more
            let m = (3 * (end + 1)) as f64 * U;
            (acc, m / (1.0 - m) * abs)
        }
        Precision::Extended => {
            let mut t = DoubleDouble::new(s.a0);
            let mut acc = if start == 0 { t } else { DoubleDouble::ZERO };
            let mut abs = acc.to_f64().abs();
            for k in 1..=end {
                t = t.mul_f64(x).div_f64(s.ratios[k - 1]);
                if k >= start {
                    acc = acc + t;
                    abs += t.to_f64().abs();
                }
            }
            let value = acc.to_f64();
            let m = (8 * (end + 1)) as f64 * U * U;
            (value, m * abs + U * value.abs())
        }
    }
}

fn sum_real(
    s: &CoefficientSeries,
    x: f64,
    start: usize,
    eps: f64,
    precision: Precision,
) -> Result<EvalResult> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    if !x.is_finite() {
        return Err(Error::invalid(format!(
            "evaluation point {x} is not finite"
        )));
    }
    let top = s.degree();
    if start > top {
        return Err(Error::invalid(format!(
            "start index {start} exceeds degree {top}"
        )));
    }
    if s.polynomial {
        let (value, rounding_bound) = sum_terms(s, x, start, top, precision);
        return Ok(EvalResult {
            value,
            rounding_bound,
            truncation_degree: top,
            tail_estimate: 0.0,
            tail: TailBound::Exact,
            converged: true,
            bracket: None,
        });
    }
    let ax = x.abs();
    let mags = term_magnitudes(s, ax);
    let alternating = x < 0.0;
    match choose_cutoff(s, &mags, ax, start, eps, alternating) {
        Cutoff::Certified {
            n,
            bound,
            kind,
            converged,
        } => {
            let (value, rounding_bound) = sum_terms(s, x, start, n, precision);
            let bracket = (kind == TailBound::Leibniz).then(|| {
                let next = value - mags[n + 1] * if (n + 1) % 2 == 1 { 1.0 } else { -1.0 };
                (value.min(next), value.max(next))
            });
            Ok(EvalResult {
                value,
                rounding_bound,
                truncation_degree: n,
                tail_estimate: bound,
                tail: kind,
                converged,
                bracket,
            })
        }
        Cutoff::Uncertain => {
            let (value, rounding_bound) = sum_terms(s, x, start, top, precision);
            Ok(EvalResult {
                value,
                rounding_bound,
                truncation_degree: top,
                tail_estimate: mags[top],
                tail: TailBound::Uncertain,
                converged: false,
                bracket: None,
            })
        }
    }
}

/// `f(x)` with a certified truncation bound.
pub fn evaluate(s: &CoefficientSeries, x: f64, eps: f64) -> Result<EvalResult> {
    sum_real(s, x, 0, eps, Precision::Double)
}

pub fn evaluate_with(
    s: &CoefficientSeries,
    x: f64,
    eps: f64,
    precision: Precision,
) -> Result<EvalResult> {
    sum_real(s, x, 0, eps, precision)
}

/// `phi(x) = f(-x)`. For `x > 0` the terms alternate and, under the Leibniz
/// condition, `bracket` holds the enclosing partial sums `S_{2m+1} <= phi <= S_{2m}`.
pub fn alternating_evaluate(s: &CoefficientSeries, x: f64, eps: f64) -> Result<EvalResult> {
    sum_real(s, -x, 0, eps, Precision::Double)
}

pub fn alternating_evaluate_with(
    s: &CoefficientSeries,
    x: f64,
    eps: f64,
    precision: Precision,
) -> Result<EvalResult> {
    sum_real(s, -x, 0, eps, precision)
}

/// `S_n(x) = sum_{k=0}^{n} a_k x^k`.
pub fn partial_sum(s: &CoefficientSeries, n: usize, x: f64) -> Result<f64> {
    if n > s.degree() {
        return Err(Error::invalid(format!(
            "partial sum degree {n} exceeds materialized degree {}",
            s.degree()
        )));
    }
    Ok(sum_terms(s, x, 0, n, Precision::Double).0)
}

/// `R_n(x) = sum_{k>=n} a_k x^k`, so that `S_n + R_{n+1} = f`.
pub fn remainder(s: &CoefficientSeries, n: usize, x: f64, eps: f64) -> Result<EvalResult> {
    if n > s.degree() {
        return Err(Error::invalid(format!(
            "remainder index {n} exceeds materialized degree {}",
            s.degree()
        )));
    }
    sum_real(s, x, n, eps, Precision::Double)
}

fn sum_complex(
    s: &CoefficientSeries,
    z: Complex64,
    start: usize,
    eps: f64,
) -> Result<ComplexEvalResult> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let top = s.degree();
    if start > top {
        return Err(Error::invalid(format!(
            "start index {start} exceeds degree {top}"
        )));
    }
    let add_terms = |end: usize| {
        let mut t = Complex64::new(s.a0, 0.0);
        let mut acc = if start == 0 {
            t
        } else {
            Complex64::new(0.0, 0.0)
        };
        for k in 1..=end {
            t = t * z / s.ratios[k - 1];
            if k >= start {
                acc += t;
            }
        }
        acc
    };
    if s.polynomial {
        return Ok(ComplexEvalResult {
            value: add_terms(top),
            truncation_degree: top,
            tail_estimate: 0.0,
            tail: TailBound::Exact,
            converged: true,
        });
    }
    let az = z.norm();
    let mags = term_magnitudes(s, az);
    match choose_cutoff(s, &mags, az, start, eps, false) {
        Cutoff::Certified {
            n,
            bound,
            kind,
            converged,
        } => Ok(ComplexEvalResult {
            value: add_terms(n),
            truncation_degree: n,
            tail_estimate: bound,
            tail: kind,
            converged,
        }),
        Cutoff::Uncertain => Ok(ComplexEvalResult {
            value: add_terms(top),
            truncation_degree: top,
            tail_estimate: mags[top],
            tail: TailBound::Uncertain,
            converged: false,
        }),
    }
}

pub fn evaluate_complex(
    s: &CoefficientSeries,
    z: Complex64,
    eps: f64,
) -> Result<ComplexEvalResult> {
    sum_complex(s, z, 0, eps)
}

pub fn remainder_complex(
    s: &CoefficientSeries,
    n: usize,
    z: Complex64,
    eps: f64,
) -> Result<ComplexEvalResult> {
    sum_complex(s, z, n, eps)
}

/// Bound on `sum_{k>n} a_k r^k` from the materialized ratios, if they decay.
pub fn tail_majorant(s: &CoefficientSeries, n: usize, r: f64) -> Option<f64> {
    if n >= s.degree() {
        return if s.polynomial { Some(0.0) } else { None };
    }
    if s.polynomial {
        let mags = term_magnitudes(s, r);
        return Some(mags[n + 1..].iter().sum());
    }
    let mags = term_magnitudes(s, r);
    certify_tail(s, &mags, r, n, false).map(|(b, _)| b)
}

/// The series-spec document read by the CLI. Exactly one of `family`, `q`,
/// `coeffs` defines the series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecFormat {
    Json,
    Toml,
}

impl SeriesSpec {
    pub fn parse_str(text: &str, format: SpecFormat) -> Result<Self> {
        match format {
            SpecFormat::Json => {
                serde_json::from_str(text).map_err(|e| spec_parse_error(&e.to_string()))
            }
            SpecFormat::Toml => toml::from_str(text).map_err(|e| spec_parse_error(e.message())),
        }
    }

    /// Reads a `.toml` or JSON document; the extension picks the format.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("toml") => SpecFormat::Toml,
            _ => SpecFormat::Json,
        };
        Self::parse_str(&text, format)
    }

    pub fn build(&self) -> Result<CoefficientSeries> {
        let definers: Vec<&str> = [
            ("family", self.family.is_some()),
            ("q", self.q.is_some()),
            ("coeffs", self.coeffs.is_some()),
        ]
        .into_iter()
        .filter_map(|(name, present)| present.then_some(name))
        .collect();
        match definers.as_slice() {
            [] => {
                return Err(Error::field(
                    "family",
                    "one of `family`, `q` or `coeffs` must define the series",
                ))
            }
            [_] => {}
            [first, second, ..] => {
                return Err(Error::field(
                    *second,
                    format!("conflicts with `{first}`; exactly one definer is allowed"),
                ))
            }
        }
        if self.q.is_none() {
            if self.a0.is_some() {
                return Err(Error::field("a0", "only valid together with `q`"));
            }
            if self.a1.is_some() {
                return Err(Error::field("a1", "only valid together with `q`"));
            }
        }
        if let Some(name) = &self.family {
            return self.build_family(name);
        }
        if self.a.is_some() {
            return Err(Error::field("a", "only valid together with `family`"));
        }
        if let Some(q) = &self.q {
            let a0 = self.a0.unwrap_or(1.0);
            let a1 = self.a1.unwrap_or(1.0);
            if !(a0 > 0.0 && a0.is_finite()) {
                return Err(Error::field("a0", format!("{a0} is not strictly positive")));
            }
            if !(a1 > 0.0 && a1.is_finite()) {
                return Err(Error::field("a1", format!("{a1} is not strictly positive")));
            }
            if q.is_empty() {
                return Err(Error::field("q", "needs at least one quotient q_2"));
            }
            if let Some(d) = self.degree {
                if d != q.len() + 1 {
                    return Err(Error::field(
                        "degree",
                        format!(
                            "{d} does not match {} quotients (degree {})",
                            q.len(),
                            q.len() + 1
                        ),
                    ));
                }
            }
            return coeffs_from_quotients(a0, a1, q).map_err(|e| match e {
                Error::NonPositiveQuotient { index, value } => {
                    Error::field("q", format!("q_{index} = {value} is not strictly positive"))
                }
                other => other,
            });
        }
        let coeffs = self.coeffs.as_ref().expect("one definer is present");
        if let Some(d) = self.degree {
            if d + 1 != coeffs.len() {
                return Err(Error::field(
                    "degree",
                    format!("{d} does not match {} coefficients", coeffs.len()),
                ));
            }
        }
        CoefficientSeries::explicit(coeffs).map_err(|e| match e {
            Error::NonPositiveCoefficient { index, value } => Error::field(
                "coeffs",
                format!("a_{index} = {value} is not strictly positive"),
            ),
            Error::InvalidInput(m) => Error::field("coeffs", m),
            other => other,
        })
    }

    fn build_family(&self, name: &str) -> Result<CoefficientSeries> {
        let degree = self.degree.unwrap_or(DEFAULT_DEGREE);
        if degree < 1 {
            return Err(Error::field("degree", "must be at least 1"));
        }
        let need_a = || -> Result<f64> {
            let a = self
                .a
                .ok_or_else(|| Error::field("a", format!("required for family `{name}`")))?;
            if !(a.is_finite() && a > 1.0) {
                return Err(Error::field("a", format!("{a} must satisfy a > 1")));
            }
            Ok(a)
        };
        match name {
            "exponential" => {
                if self.a.is_some() {
                    return Err(Error::field("a", "family `exponential` takes no parameter"));
                }
                CoefficientSeries::exponential(degree)
            }
            "partial-theta" => CoefficientSeries::partial_theta(need_a()?, degree),
            "euler-like" => CoefficientSeries::euler_like(need_a()?, degree),
            "explicit" | "from-quotients" => Err(Error::field(
                "family",
                format!("`{name}` is implied by `coeffs` / `q`; give those fields instead"),
            )),
            other => Err(Error::field(
                "family",
                format!(
                    "unknown family `{other}` (expected exponential, partial-theta or euler-like)"
                ),
            )),
        }
    }
}

fn spec_parse_error(msg: &str) -> Error {
    // serde reports unknown fields as "unknown field `x`"
    let field = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.contains("unknown field") || msg.contains("invalid type"))
        .unwrap_or("document");
    Error::field(field, msg.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_quotients() {
        let s = CoefficientSeries::exponential(3).unwrap();
        let q = quotients_from_coeffs(&s).unwrap();
        assert_eq!(q.q(2), Some(2.0));
        assert_eq!(q.q(3), Some(1.5));
    }

    #[test]
    fn partial_theta_quotients_constant() {
        let s = CoefficientSeries::partial_theta(2.0, 5).unwrap();
        let q = quotients_from_coeffs(&s).unwrap();
        assert!(q.q.iter().all(|&v| v == 4.0));
    }

    #[test]
    fn equal_coefficients_give_unit_quotients() {
        let q = quotients_from_slice(&[1.0; 6]).unwrap();
        assert!(q.q.iter().all(|&v| v == 1.0));
        assert!(q.p.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rejects_non_positive_coefficient_by_index() {
        let err = quotients_from_slice(&[1.0, 0.5, -0.1, 0.2]).unwrap_err();
        assert_eq!(
            err,
            Error::NonPositiveCoefficient {
                index: 2,
                value: -0.1
            }
        );
    }

    #[test]
    fn rejects_short_series() {
        let s = CoefficientSeries::explicit(&[1.0, 1.0]).unwrap();
        assert!(quotients_from_coeffs(&s).is_err());
    }

    #[test]
    fn family_parameter_must_exceed_one() {
        assert!(CoefficientSeries::partial_theta(1.0, 8).is_err());
        assert!(CoefficientSeries::euler_like(0.5, 8).is_err());
    }

    #[test]
    fn constant_quotient_reconstruction() {
        let s = coeffs_from_quotients(1.0, 1.0, &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(s.coefficient(2), 0.25);
        let ones = coeffs_from_quotients(1.0, 1.0, &[1.0; 5]).unwrap();
        assert!(ones.coefficients().iter().all(|&c| c == 1.0));
    }

    #[test]
    fn from_quotients_rejects_zero() {
        let err = coeffs_from_quotients(1.0, 1.0, &[2.0, 0.0]).unwrap_err();
        assert_eq!(
            err,
            Error::NonPositiveQuotient {
                index: 3,
                value: 0.0
            }
        );
    }

    #[test]
    fn normalize_exponential_is_identity() {
        let s = CoefficientSeries::exponential(10).unwrap();
        let g = s.normalize();
        assert_eq!(g.coefficients(), s.coefficients());
    }

    #[test]
    fn normalized_partial_theta_segment_endpoint() {
        let g = CoefficientSeries::partial_theta(2.0, 10)
            .unwrap()
            .normalize();
        assert_eq!(g.a0(), 1.0);
        assert_eq!(g.a1(), 1.0);
        // a_1 / a_2 of the normalized function equals q_2 = 4
        assert_eq!(g.ratio(2), 4.0);
    }

    #[test]
    fn exponential_at_one() {
        let s = CoefficientSeries::exponential(40).unwrap();
        let r = evaluate(&s, 1.0, 1e-12).unwrap();
        assert!((r.value - std::f64::consts::E).abs() < 1e-12);
        assert!(r.converged);
        assert!(r.tail_estimate <= 1e-12);
    }

    #[test]
    fn evaluation_at_zero_is_a0() {
        let s = CoefficientSeries::explicit(&[3.5, 1.0, 0.25, 0.1]).unwrap();
        let r = evaluate(&s, 0.0, 1e-12).unwrap();
        assert_eq!(r.value, 3.5);
        assert_eq!(r.tail_estimate, 0.0);
    }

    #[test]
    fn partial_sums() {
        let e = CoefficientSeries::exponential(10).unwrap();
        assert_eq!(partial_sum(&e, 0, 7.0).unwrap(), 1.0);
        assert_eq!(partial_sum(&e, 2, 1.0).unwrap(), 2.5);
        let g = CoefficientSeries::partial_theta(2.0, 30)
            .unwrap()
            .normalize();
        assert_eq!(partial_sum(&g, 4, -2.0).unwrap(), -0.12109375);
        assert!(partial_sum(&g, 31, 1.0).is_err());
    }

    #[test]
    fn uncertain_when_terms_grow() {
        // ratios stay at 1, so |x| = 2 never decays
        let s = CoefficientSeries::explicit(&[1.0; 8]).unwrap();
        let r = evaluate(&s, 2.0, 1e-12).unwrap();
        assert_eq!(r.tail, TailBound::Uncertain);
        assert!(!r.converged);
        assert!(r.tail_estimate.is_finite());
    }

    #[test]
    fn polynomial_sections_sum_exactly() {
        let e = CoefficientSeries::exponential(10)
            .unwrap()
            .section(3)
            .unwrap();
        let r = evaluate(&e, 2.0, 1e-12).unwrap();
        assert_eq!(r.value, 1.0 + 2.0 + 2.0 + 8.0 / 6.0);
        assert_eq!(r.tail, TailBound::Exact);
    }

    #[test]
    fn spec_exactly_one_definer() {
        let both = SeriesSpec {
            family: Some("exponential".into()),
            coeffs: Some(vec![1.0, 1.0, 0.5]),
            ..Default::default()
        };
        match both.build().unwrap_err() {
            Error::SpecField { field, .. } => assert_eq!(field, "coeffs"),
            e => panic!("unexpected {e:?}"),
        }
        match SeriesSpec::default().build().unwrap_err() {
            Error::SpecField { field, .. } => assert_eq!(field, "family"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn spec_family_parameter_checked() {
        let s = SeriesSpec {
            family: Some("partial-theta".into()),
            a: Some(0.9),
            ..Default::default()
        };
        match s.build().unwrap_err() {
            Error::SpecField { field, .. } => assert_eq!(field, "a"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn spec_parses_toml_and_json() {
        let j = SeriesSpec::parse_str(
            r#"{"family":"euler-like","a":3,"degree":12}"#,
            SpecFormat::Json,
        )
        .unwrap();
        let t = SeriesSpec::parse_str(
            "family = \"euler-like\"\na = 3.0\ndegree = 12\n",
            SpecFormat::Toml,
        )
        .unwrap();
        assert_eq!(j.build().unwrap(), t.build().unwrap());
        let bad = SeriesSpec::parse_str(r#"{"family":"exponential","b":1}"#, SpecFormat::Json)
            .unwrap_err();
        match bad {
            Error::SpecField { field, .. } => assert_eq!(field, "b"),
            e => panic!("unexpected {e:?}"),
        }
    }
}
