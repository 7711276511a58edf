use super::verdict::{CriterionKind, CriterionVerdict, Status, WitnessRecord, EQ_TOL};
use crate::error::{Error, Result};
use crate::roots::{
    count_series_zeros_in_disk, count_zeros_in_disk, min_modulus_on_circle, poly_roots,
    sign_scan_segment_with, ScanOptions,
};
use crate::series::{quotients_from_coeffs, CoefficientSeries, QuotientSequence};
use num_complex::Complex64;
use serde::Serialize;

/// Relative tolerance for monotonicity of a quotient window.
pub const MONOTONE_TOL: f64 = 1e-12;

fn need(q: &QuotientSequence, n: usize) -> Result<f64> {
    q.q(n).ok_or_else(|| {
        Error::invalid(format!(
            "q_{n} is not materialized (last index {})",
            q.last_index()
        ))
    })
}

/// `q_n >= n/(n-1)` for every materialized `n`; equality anywhere forces
/// `f = c e^{alpha z}`.
pub fn newton_check(q: &QuotientSequence) -> CriterionVerdict {
    let mut v = CriterionVerdict::new("newton", CriterionKind::Necessary);
    if q.q.is_empty() {
        return v.inconclusive("no second quotients materialized");
    }
    let mut equal = Vec::new();
    for (n, qn) in q.indexed() {
        let m = qn - n as f64 / (n as f64 - 1.0);
        if m.abs() <= EQ_TOL {
            equal.push(n);
        }
        v.margins.push(format!("q{n}"), m);
    }
    let worst = q
        .indexed()
        .map(|(n, qn)| (n, qn - n as f64 / (n as f64 - 1.0)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(n, _)| n);
    v = v.value("window", q.q.len() as f64).decide(EQ_TOL);
    v.witness = worst.map(|n| WitnessRecord::Index { n });
    if !equal.is_empty() {
        let list: Vec<String> = equal.iter().map(|n| n.to_string()).collect();
        v = v.flag("exponential-equality").note(format!(
            "q_m = m/(m-1) at m = {}; membership then forces f = c exp(alpha z)",
            list.join(", ")
        ));
    }
    v
}

/// `q3 (q2 - 4) + 3 >= 0`, with the consequence `q3 >= q2 => q2 >= 3`.
pub fn lemma_q2q3_check(q2: f64, q3: f64) -> CriterionVerdict {
    let mut v = CriterionVerdict::new("lemma_q2q3", CriterionKind::Necessary);
    if !(q2 > 0.0 && q3 > 0.0) {
        return v.inconclusive(format!(
            "quotients must be positive, got q2 = {q2}, q3 = {q3}"
        ));
    }
    let margin = q3 * (q2 - 4.0) + 3.0;
    v = v
        .margin("q3(q2-4)+3", margin)
        .value("q2", q2)
        .value("q3", q3)
        .decide(EQ_TOL * (1.0 + 4.0 * q3));
    // for q2 <= 1 the consequence is void: q2 = q3 = 1/2 has margin 5/4
    if q3 >= q2 && q2 > 1.0 && v.holds() {
        if q2 >= 3.0 - 1e-9 {
            v = v.flag("corollary-q2-ge-3");
        } else {
            v = v.flag("corollary-inconsistent");
        }
    }
    if v.fails() {
        v = v.flag("not-in-lp-i");
    }
    v
}

/// `q_n >= 4` for every materialized `n`.
pub fn hutchinson_check(q: &QuotientSequence) -> CriterionVerdict {
    let mut v = CriterionVerdict::new("hutchinson", CriterionKind::Sufficient);
    if q.q.is_empty() {
        return v.inconclusive("no second quotients materialized");
    }
    for (n, qn) in q.indexed() {
        v.margins.push(format!("q{n}-4"), qn - 4.0);
    }
    v = v.value("window", q.q.len() as f64).decide(EQ_TOL);
    if v.holds() {
        v = v.flag("sections-real-simple-negative");
    } else {
        v = v.note("sufficient condition not met; says nothing against membership");
    }
    v
}

/// Bracket for the partial theta constant used by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QInfBracket {
    pub low: f64,
    pub high: f64,
}

/// Monotone-quotient classification with `q_inf` from the theta module.
pub fn monotone_classify(q: &QuotientSequence, limit_hint: Option<f64>) -> CriterionVerdict {
    let r = crate::theta::q_inf_reference();
    monotone_classify_with(
        q,
        limit_hint,
        QInfBracket {
            low: r.low,
            high: r.high,
        },
    )
}

pub fn monotone_classify_with(
    q: &QuotientSequence,
    limit_hint: Option<f64>,
    q_inf: QInfBracket,
) -> CriterionVerdict {
    let mut v = CriterionVerdict::new("monotone_classify", CriterionKind::Classifier);
    if q.q.len() < 3 {
        return v.inconclusive(format!(
            "needs at least 3 second quotients, have {}",
            q.q.len()
        ));
    }
    let decreasing = q.q.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_TOL));
    let increasing = q.q.windows(2).all(|w| w[1] >= w[0] * (1.0 - MONOTONE_TOL));
    let (limit, source) = match limit_hint {
        Some(l) => (l, "limit-from-hint"),
        None => (*q.q.last().expect("non-empty"), "limit-from-last-entry"),
    };
    v = v
        .value("window", q.q.len() as f64)
        .value("limit", limit)
        .value("q_inf_low", q_inf.low)
        .value("q_inf_high", q_inf.high)
        .flag(source);
    if decreasing && increasing {
        v = v.note("constant window: read as weakly decreasing and weakly increasing");
    }
    if decreasing && limit >= q_inf.high {
        v = v
            .margin("limit-q_inf", limit - q_inf.high)
            .flag("decreasing")
            .decide(0.0);
        return v.note("decreasing with limit >= q_inf: all zeros real and negative");
    }
    if increasing && limit < q_inf.low {
        v = v
            .margin("limit-q_inf", limit - q_inf.low)
            .flag("increasing")
            .decide(0.0);
        return v
            .flag("not-in-lp")
            .note("increasing with limit < q_inf: not in the class");
    }
    if decreasing {
        v = v.flag("decreasing");
    }
    if increasing {
        v = v.flag("increasing");
    }
    let reason = match (decreasing, increasing) {
        (false, false) => "window is not monotone".to_string(),
        (true, _) => format!("decreasing but limit {limit} is below q_inf"),
        (false, true) => format!("increasing but limit {limit} is not below q_inf"),
    };
    v.inconclusive(reason)
}

/// Sign witness on `[-a1/a2, 0]`, scanned as `[-q2, 0]` after normalization.
pub fn thm1_zero_segment_check(s: &CoefficientSeries, grid: usize) -> Result<CriterionVerdict> {
    thm1_zero_segment_check_with(
        s,
        &ScanOptions {
            grid,
            ..ScanOptions::default()
        },
    )
}

pub fn thm1_zero_segment_check_with(
    s: &CoefficientSeries,
    opts: &ScanOptions,
) -> Result<CriterionVerdict> {
    let grid = opts.grid;
    let mut v = CriterionVerdict::new("thm1_zero_segment", CriterionKind::Necessary);
    let q = quotients_from_coeffs(s)?;
    if q.q.len() < 2 {
        return Ok(v.inconclusive("needs q2 and q3"));
    }
    let (q2, q3) = (q.q[0], q.q[1]);
    v = v.value("q2", q2).value("q3", q3);
    if q2 > q3 * (1.0 + EQ_TOL) {
        return Ok(v.inconclusive("hypothesis q2 <= q3 not met; segment not scanned"));
    }
    let g = s.normalize();
    let scan = sign_scan_segment_with(&g, -q2, 0.0, opts)?;
    let scale = s.ratio(1);
    v = v
        .value("segment_lo", -q2)
        .value("grid", grid as f64)
        .value("min_x", scan.minimum.x)
        .value("min_value", scan.minimum.value);
    if let Some(c) = scan.first_crossing {
        v = v.value("first_crossing_x", c.x);
    }
    match scan.witness {
        Some(w) => {
            v = v
                .margin("witness_depth", -w.upper())
                .value("witness_x_original", w.x * scale)
                .value("witness_value_original", w.value * s.a0())
                .decide(0.0);
            v.witness = Some(WitnessRecord::Point {
                x: w.x,
                value: w.value,
            });
        }
        None => {
            v = v
                .margin("witness_depth", -scan.minimum.upper())
                .decide(0.0)
                .flag("necessary-condition-violated")
                .note("no non-positive value on the grid: necessary condition for membership numerically violated");
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm2Bound {
    pub q2: f64,
    pub bound: f64,
    pub remark_bound: f64,
}

/// Upper bound on `q3` for `3 <= q2 < 4`.
pub fn thm2_bound(q2: f64) -> Result<Thm2Bound> {
    if !(3.0..4.0).contains(&q2) {
        return Err(Error::invalid(format!(
            "bound defined only for 3 <= q2 < 4, got {q2}"
        )));
    }
    let num = -q2 * (2.0 * q2 - 9.0) + 2.0 * (q2 - 3.0) * (q2 * (q2 - 3.0)).sqrt();
    Ok(Thm2Bound {
        q2,
        bound: num / (q2 * (4.0 - q2)),
        remark_bound: 3.0 / (4.0 - q2),
    })
}

pub fn thm2_check(q2: f64, q3: f64) -> CriterionVerdict {
    let mut v = CriterionVerdict::new("thm2", CriterionKind::Necessary)
        .value("q2", q2)
        .value("q3", q3);
    if q2 >= 4.0 {
        return v.inconclusive("q2 >= 4: bound formula changes sign in the denominator");
    }
    if q2 > q3 * (1.0 + EQ_TOL) {
        return v.inconclusive("hypothesis q2 <= q3 not met");
    }
    if q2 < 3.0 {
        return v.inconclusive("q2 < 3 with q3 >= q2 is already excluded by lemma_q2q3");
    }
    let b = thm2_bound(q2).expect("domain checked");
    v = v
        .value("bound", b.bound)
        .value("remark_bound", b.remark_bound)
        .margin("bound-q3", b.bound - q3)
        .decide(EQ_TOL * (1.0 + q3));
    if v.fails() {
        v = v.flag("not-in-lp");
    }
    v
}

/// `q3 <= 8 / (d (4 - d))`, `d = min(q2, q4)`, guarantees a sign witness.
pub fn thm3_check(q2: f64, q3: f64, q4: f64) -> CriterionVerdict {
    let mut v = CriterionVerdict::new("thm3", CriterionKind::Sufficient)
        .value("q2", q2)
        .value("q3", q3)
        .value("q4", q4);
    if !((3.0..4.0).contains(&q2) && q3 >= 2.0 && q4 >= 3.0) {
        return v.inconclusive("hypothesis 3 <= q2 < 4, q3 >= 2, q4 >= 3 not met");
    }
    let d = q2.min(q4);
    let threshold = 8.0 / (d * (4.0 - d));
    v = v
        .value("d", d)
        .value("threshold", threshold)
        .margin("threshold-q3", threshold - q3)
        .decide(EQ_TOL * (1.0 + q3));
    if v.holds() {
        v.flag("confirm-with-thm1_zero_segment")
    } else {
        v.note("sufficient condition not met; no conclusion about the witness")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma2Bound {
    /// Bound on `max |R_5(z, phi)|` over `|z| = q2`.
    pub bound: f64,
    /// `q3 q4 q5 q6 - (q6 + 1)`
    pub gate_margin: f64,
    /// `q2 / (q3^2 q4) - bound`
    pub rouche_margin: f64,
}

/// Tail bound from `[q2, q3, q4, q5, q6]`.
pub fn tail_bound_lm2(q: [f64; 5]) -> Result<Lemma2Bound> {
    if let Some((i, &v)) = q
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v > 1.0 && v.is_finite()))
    {
        return Err(Error::invalid(format!("q_{} = {v} must exceed 1", i + 2)));
    }
    let [q2, q3, q4, q5, q6] = q;
    let den = q3.powi(3) * q4 * q4 * q5 * q6 - q3 * q3 * q4;
    if !(den > 0.0) {
        return Err(Error::invalid(format!(
            "tail bound denominator {den} is not positive"
        )));
    }
    let bound = q2 * q6 / den;
    Ok(Lemma2Bound {
        bound,
        gate_margin: q3 * q4 * q5 * q6 - (q6 + 1.0),
        rouche_margin: q2 / (q3 * q3 * q4) - bound,
    })
}

pub fn lemma2_check(q: &QuotientSequence) -> CriterionVerdict {
    let v = CriterionVerdict::new("lemma2_tail_bound", CriterionKind::Auxiliary);
    let qs: Result<Vec<f64>> = (2..=6).map(|n| need(q, n)).collect();
    let qs = match qs {
        Ok(x) => x,
        Err(e) => return v.inconclusive(e.to_string()),
    };
    match tail_bound_lm2([qs[0], qs[1], qs[2], qs[3], qs[4]]) {
        Err(e) => v.inconclusive(format!("hypothesis not met: {e}")),
        Ok(b) => {
            let mut v = v
                .value("bound", b.bound)
                .margin("gate", b.gate_margin)
                .margin("rouche", b.rouche_margin);
            // Rouché needs both inequalities strict
            v.status = if b.gate_margin > 0.0 && b.rouche_margin > 0.0 {
                Status::Holds
            } else {
                Status::Fails
            };
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApolarQuartic {
    pub q2: f64,
    pub b2: f64,
    pub b3: f64,
    /// `{0, 0, q2, -3 (q2 - 4)}`
    pub q_roots: [Complex64; 4],
    /// Largest distance between the closed-form and the numeric roots of `Q`.
    pub root_crosscheck: f64,
    /// Scale-relative apolarity sum of `S_4(z, phi)` and `Q`.
    pub apolarity_residual: f64,
    pub s4_roots: Vec<Complex64>,
    pub s4_min_modulus: f64,
    /// `S_4` has a root with `|z| <= q2 + 1e-8`.
    pub root_in_disk: bool,
}

const BINOM4: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

/// `S_4(z, phi)` for normalized quotient data.
pub fn s4_phi(q2: f64, q3: f64, q4: f64) -> [f64; 5] {
    [
        1.0,
        -1.0,
        1.0 / q2,
        -1.0 / (q2 * q2 * q3),
        1.0 / (q2.powi(3) * q3 * q3 * q4),
    ]
}

/// Scale-relative `sum (-1)^k C(n,k) a_k b_{n-k}` for ordinary coefficient
/// vectors `p`, `q` of degree 4.
pub fn apolarity_residual(p: &[f64; 5], q: &[f64; 5]) -> f64 {
    let a: Vec<f64> = p.iter().zip(BINOM4).map(|(c, b)| c / b).collect();
    let b: Vec<f64> = q.iter().zip(BINOM4).map(|(c, b)| c / b).collect();
    let mut sum = 0.0;
    let mut scale = 0.0;
    for k in 0..5 {
        let t = BINOM4[k] * a[k] * b[4 - k];
        sum += if k % 2 == 0 { t } else { -t };
        scale += t.abs();
    }
    if scale == 0.0 {
        0.0
    } else {
        sum.abs() / scale
    }
}

/// The quartic apolar to `S_4(z, phi)` with roots `0, 0, q2, -3(q2 - 4)`.
pub fn apolar_quartic(q2: f64, q3: f64, q4: f64) -> Result<ApolarQuartic> {
    if !(q2 >= 3.0 && q2.is_finite()) {
        return Err(Error::invalid(format!(
            "apolar construction needs q2 >= 3, got {q2}"
        )));
    }
    if !(q3 > 0.0 && q4 > 0.0) {
        return Err(Error::invalid("q3 and q4 must be positive"));
    }
    let b3 = (q2 - 6.0) / 2.0;
    let b2 = -q2 * (1.0 + b3);
    let qc = [0.0, 0.0, 6.0 * b2, 4.0 * b3, 1.0];
    let closed = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(q2, 0.0),
        Complex64::new(-3.0 * (q2 - 4.0), 0.0),
    ];
    let numeric = poly_roots(&qc)?;
    let root_crosscheck = closed
        .iter()
        .map(|z| {
            numeric
                .roots
                .iter()
                .map(|w| (z - w).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let p = s4_phi(q2, q3, q4);
    let s4 = poly_roots(&p)?;
    let s4_min_modulus = s4
        .roots
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min);
    Ok(ApolarQuartic {
        q2,
        b2,
        b3,
        q_roots: closed,
        root_crosscheck,
        apolarity_residual: apolarity_residual(&p, &qc),
        s4_roots: s4.roots,
        s4_min_modulus,
        root_in_disk: s4_min_modulus <= q2 + 1e-8,
    })
}

pub fn lemma3_check(q: &QuotientSequence) -> CriterionVerdict {
    let v = CriterionVerdict::new("lemma3_apolar", CriterionKind::Auxiliary);
    let (q2, q3, q4) = match (need(q, 2), need(q, 3), need(q, 4)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => return v.inconclusive("needs q2, q3, q4"),
    };
    if q2 < 3.0 {
        return v.value("q2", q2).inconclusive("hypothesis q2 >= 3 not met");
    }
    match apolar_quartic(q2, q3, q4) {
        Err(e) => CriterionVerdict::from_error("lemma3_apolar", CriterionKind::Auxiliary, &e),
        Ok(a) => v
            .value("apolarity_residual", a.apolarity_residual)
            .value("q_root_crosscheck", a.root_crosscheck)
            .value("s4_min_modulus", a.s4_min_modulus)
            .margin("residual", 1e-12 - a.apolarity_residual)
            .margin("root_in_disk", q2 + 1e-8 - a.s4_min_modulus)
            .decide(0.0),
    }
}

/// Rouché step: when the tail bound separates, `phi` and `S_4(z, phi)` have
/// equally many zeros in `|z| < q2`.
pub fn rouche_check(s: &CoefficientSeries, q: &QuotientSequence) -> Result<CriterionVerdict> {
    let v = CriterionVerdict::new("rouche_zero_count", CriterionKind::Auxiliary);
    let lm2 = lemma2_check(q);
    if !lm2.holds() {
        return Ok(v.inconclusive("strict tail-bound gate not met; counts not compared"));
    }
    let g = s.normalize();
    let q2 = q.q[0];
    let eval_degree = if g.is_polynomial() {
        g.degree()
    } else if g.degree() >= 2 {
        (g.degree() - 2).min(60)
    } else {
        return Ok(v.inconclusive("series too short to certify a tail"));
    };
    let circle = min_modulus_on_circle(&g.section_coefficients(4, true), q2)?;
    let bound = lm2.computed.get("bound").unwrap_or(f64::NAN);
    if !(circle.value > bound) {
        return Ok(v
            .value("s4_min_modulus_on_circle", circle.value)
            .value("tail_bound", bound)
            .inconclusive(
                "min |S_4| on the circle does not exceed the tail bound; counts not compared",
            ));
    }
    // zeros of phi(z) = g(-z) mirror those of g, so both disks count alike
    let full = count_series_zeros_in_disk(&g, q2, eval_degree)?;
    let s4 = count_zeros_in_disk(&g.section_coefficients(4, true), q2)?;
    let mismatch = full.count.abs_diff(s4.count) as f64;
    let mut v = v
        .value("radius", q2)
        .value("count_phi", full.count as f64)
        .value("count_s4", s4.count as f64)
        .value("eval_degree", eval_degree as f64)
        .value("s4_min_modulus_on_circle", circle.value)
        .value("tail_bound", bound)
        .margin("contour_inequality", circle.value - bound)
        .margin(
            "count_mismatch",
            if mismatch == 0.0 { 0.0 } else { -mismatch },
        )
        .decide(0.0);
    if v.holds() && full.count > 0 {
        v = v.flag("zero-in-open-disk");
    }
    Ok(v)
}
