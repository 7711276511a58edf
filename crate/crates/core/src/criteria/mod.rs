//! Membership criteria over a quotient sequence, each reported as a
//! structured verdict.
//!
//! Every criterion is a [`Criterion`] registered by name. [`full_report`]
//! runs the registry in its fixed order and never aborts on a single
//! criterion's error; the error is recorded in that verdict instead.

mod checks;
mod verdict;

pub use checks::{
    apolar_quartic, apolarity_residual, hutchinson_check, lemma2_check, lemma3_check,
    lemma_q2q3_check, monotone_classify, monotone_classify_with, newton_check, rouche_check,
    s4_phi, tail_bound_lm2, thm1_zero_segment_check, thm1_zero_segment_check_with, thm2_bound,
    thm2_check, thm3_check, ApolarQuartic, Lemma2Bound, QInfBracket, Thm2Bound, MONOTONE_TOL,
};
pub use verdict::{
    CriterionKind, CriterionVerdict, ErrorRecord, Named, Status, WitnessRecord, EQ_TOL,
};

use crate::error::{Error, Result};
use crate::precision::Precision;
use crate::roots::{poly_roots_with, RootOptions, RootReport, RootVerdict, ScanOptions};
use crate::series::{quotients_from_coeffs, CoefficientSeries, Family, QuotientSequence};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::{Arc, OnceLock};

/// Default cap on the truncation degree handed to the root finder.
pub const ROOT_DEGREE: usize = 40;
/// Coefficients below this are treated as lost to underflow for root finding.
const ROOT_COEFF_FLOOR: f64 = 1e-290;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    /// Grid for the zero-segment scan.
    pub segment_grid: usize,
    /// Truncation target for each evaluation in the scan.
    pub scan_eps: f64,
    pub precision: Precision,
    pub root_degree: usize,
    pub root_options: RootOptions,
    /// Overrides the family limit in `monotone_classify`.
    pub limit_hint: Option<f64>,
    /// Registry names to run; `None` runs all.
    pub only: Option<Vec<String>>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            segment_grid: 1024,
            scan_eps: 1e-15,
            precision: Precision::Double,
            root_degree: ROOT_DEGREE,
            root_options: RootOptions::default(),
            limit_hint: None,
            only: None,
        }
    }
}

/// Inputs shared by all criteria of one report.
pub struct AnalysisContext<'a> {
    pub series: &'a CoefficientSeries,
    pub quotients: QuotientSequence,
    pub options: &'a ReportOptions,
    roots: OnceLock<std::result::Result<(usize, RootReport), Error>>,
}

impl<'a> AnalysisContext<'a> {
    pub fn new(series: &'a CoefficientSeries, options: &'a ReportOptions) -> Result<Self> {
        Ok(AnalysisContext {
            series,
            quotients: quotients_from_coeffs(series)?,
            options,
            roots: OnceLock::new(),
        })
    }

    pub fn q(&self, n: usize) -> Result<f64> {
        self.quotients
            .q(n)
            .ok_or_else(|| Error::invalid(format!("q_{n} is not materialized")))
    }

    /// Roots of the truncation of degree [`Self::root_degree`].
    pub fn truncation_roots(&self) -> Result<&(usize, RootReport)> {
        self.roots
            .get_or_init(|| {
                let n = self.root_degree();
                let coeffs = self.series.section_coefficients(n, false);
                poly_roots_with(&coeffs, &self.options.root_options).map(|r| (n, r))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `min(N, root_degree)`, lowered until every coefficient is well inside
    /// the binary64 range.
    pub fn root_degree(&self) -> usize {
        let cap = self.options.root_degree.min(self.series.degree()).max(1);
        let coeffs = self.series.section_coefficients(cap, false);
        let ok = coeffs
            .iter()
            .position(|&c| !(c >= ROOT_COEFF_FLOOR && c.is_finite()))
            .unwrap_or(coeffs.len());
        (ok.saturating_sub(1)).clamp(1, cap)
    }

    pub fn limit_hint(&self) -> Option<f64> {
        self.options
            .limit_hint
            .or_else(|| self.series.quotient_limit())
    }
}

pub trait Criterion: Send + Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> CriterionKind;
    fn evaluate(&self, ctx: &AnalysisContext) -> Result<CriterionVerdict>;
}

macro_rules! criterion {
    ($ty:ident, $name:literal, $kind:ident, |$ctx:ident| $body:expr) => {
        pub struct $ty;
        impl Criterion for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn kind(&self) -> CriterionKind {
                CriterionKind::$kind
            }
            fn evaluate(&self, $ctx: &AnalysisContext) -> Result<CriterionVerdict> {
                $body
            }
        }
    };
}

criterion!(Newton, "newton", Necessary, |ctx| Ok(newton_check(
    &ctx.quotients
)));
criterion!(LemmaQ2Q3, "lemma_q2q3", Necessary, |ctx| Ok(
    lemma_q2q3_check(ctx.q(2)?, ctx.q(3)?)
));
criterion!(Hutchinson, "hutchinson", Sufficient, |ctx| Ok(
    hutchinson_check(&ctx.quotients)
));
criterion!(MonotoneClassify, "monotone_classify", Classifier, |ctx| Ok(
    monotone_classify(&ctx.quotients, ctx.limit_hint())
));
criterion!(Thm1ZeroSegment, "thm1_zero_segment", Necessary, |ctx| {
    let opts = ScanOptions {
        grid: ctx.options.segment_grid,
        eps: ctx.options.scan_eps,
        precision: ctx.options.precision,
        ..ScanOptions::default()
    };
    thm1_zero_segment_check_with(ctx.series, &opts)
});
criterion!(Thm2, "thm2", Necessary, |ctx| Ok(thm2_check(
    ctx.q(2)?,
    ctx.q(3)?
)));
criterion!(Thm3, "thm3", Sufficient, |ctx| Ok(thm3_check(
    ctx.q(2)?,
    ctx.q(3)?,
    ctx.q(4)?
)));
criterion!(Lemma2TailBound, "lemma2_tail_bound", Auxiliary, |ctx| Ok(
    lemma2_check(&ctx.quotients)
));
criterion!(Lemma3Apolar, "lemma3_apolar", Auxiliary, |ctx| Ok(
    lemma3_check(&ctx.quotients)
));
criterion!(RoucheZeroCount, "rouche_zero_count", Auxiliary, |ctx| {
    rouche_check(ctx.series, &ctx.quotients)
});
criterion!(
    PartialThetaMembership,
    "partial_theta_membership",
    Classifier,
    |ctx| match ctx.series.family() {
        Family::PartialTheta { a } => crate::theta::g_a_membership(a, ctx.series.degree()),
        _ => Ok(
            CriterionVerdict::new("partial_theta_membership", CriterionKind::Classifier)
                .inconclusive("applies to the partial theta family only")
        ),
    }
);
criterion!(
    TruncationRealRooted,
    "truncation_real_rooted",
    Diagnostic,
    |ctx| {
        let (n, r) = ctx.truncation_roots()?;
        Ok(truncation_verdict(*n, r))
    }
);

fn truncation_verdict(n: usize, r: &RootReport) -> CriterionVerdict {
    let off_axis = r
        .roots
        .iter()
        .filter(|&&z| !(r.is_real(z) && z.re < 0.0))
        .count();
    let mut v = CriterionVerdict::new("truncation_real_rooted", CriterionKind::Diagnostic)
        .value("degree", n as f64)
        .value("nonreal_roots", r.nonreal_count() as f64)
        .value(
            "max_residual",
            r.residuals.iter().copied().fold(0.0, f64::max),
        )
        .value("min_separation", r.min_separation)
        .margin("roots_off_negative_axis", -(off_axis as f64));
    v = match r.verdict {
        RootVerdict::Uncertain => v.inconclusive("root residuals above tolerance"),
        _ => v.decide(0.0),
    };
    if v.holds() {
        v = v.flag(if r.simple {
            "simple"
        } else {
            "possibly-multiple"
        });
    }
    v.note(format!("{} roots of S_{n} via {}", r.roots.len(), r.method))
}

/// Ordered table of criteria.
#[derive(Clone)]
pub struct CriterionRegistry {
    entries: Vec<Arc<dyn Criterion>>,
}

impl CriterionRegistry {
    pub fn empty() -> Self {
        CriterionRegistry {
            entries: Vec::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Newton));
        r.register(Arc::new(LemmaQ2Q3));
        r.register(Arc::new(Hutchinson));
        r.register(Arc::new(MonotoneClassify));
        r.register(Arc::new(Thm1ZeroSegment));
        r.register(Arc::new(Thm2));
        r.register(Arc::new(Thm3));
        r.register(Arc::new(Lemma2TailBound));
        r.register(Arc::new(Lemma3Apolar));
        r.register(Arc::new(RoucheZeroCount));
        r.register(Arc::new(PartialThetaMembership));
        r.register(Arc::new(TruncationRealRooted));
        r
    }

    pub fn global() -> &'static CriterionRegistry {
        static GLOBAL: OnceLock<CriterionRegistry> = OnceLock::new();
        GLOBAL.get_or_init(Self::with_builtins)
    }

    /// Appends, or replaces an entry with the same name in place.
    pub fn register(&mut self, c: Arc<dyn Criterion>) {
        match self.entries.iter().position(|e| e.name() == c.name()) {
            Some(i) => self.entries[i] = c,
            None => self.entries.push(c),
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Criterion>> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "criterion",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    /// Entries named in `only`, in registry order.
    pub fn select(&self, only: Option<&[String]>) -> Result<Vec<Arc<dyn Criterion>>> {
        match only {
            None => Ok(self.entries.clone()),
            Some(names) => {
                for n in names {
                    self.get(n)?;
                }
                Ok(self
                    .entries
                    .iter()
                    .filter(|e| names.iter().any(|n| n == e.name()))
                    .cloned()
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullReport {
    pub quotients: QuotientSequence,
    pub verdicts: Vec<CriterionVerdict>,
    pub root_degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roots: Option<RootReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_error: Option<ErrorRecord>,
}

impl FullReport {
    pub fn verdict(&self, name: &str) -> Option<&CriterionVerdict> {
        self.verdicts.iter().find(|v| v.criterion == name)
    }

    /// First numerical refusal recorded by any criterion.
    pub fn numerical_error(&self) -> Option<&ErrorRecord> {
        self.verdicts
            .iter()
            .filter_map(|v| v.error.as_ref())
            .find(|e| e.numerical)
    }
}

pub fn full_report(s: &CoefficientSeries) -> Result<FullReport> {
    full_report_with(s, &ReportOptions::default(), CriterionRegistry::global())
}

/// Runs the selected criteria concurrently; output order is registry order.
pub fn full_report_with(
    s: &CoefficientSeries,
    options: &ReportOptions,
    registry: &CriterionRegistry,
) -> Result<FullReport> {
    let ctx = AnalysisContext::new(s, options)?;
    let selected = registry.select(options.only.as_deref())?;
    // computed outside the parallel section so no worker blocks on its lock
    crate::theta::q_inf_reference();
    let verdicts: Vec<CriterionVerdict> = selected
        .par_iter()
        .map(|c| match c.evaluate(&ctx) {
            Ok(mut v) => {
                v.kind = c.kind();
                v
            }
            Err(e) => CriterionVerdict::from_error(c.name(), c.kind(), &e),
        })
        .collect();
    let mut verdicts = verdicts;
    let (roots, root_error) = match ctx.truncation_roots() {
        Ok((_, r)) => (Some(r.clone()), None),
        Err(e) => (None, Some(ErrorRecord::from(&e))),
    };
    if let (Some(r), Some(h)) = (
        &roots,
        verdicts.iter_mut().find(|v| v.criterion == "hutchinson"),
    ) {
        if h.holds() {
            let ok = r.verdict == RootVerdict::AllRealNegative && r.simple;
            h.flags.push(
                if ok {
                    "conclusion-verified-on-truncation"
                } else {
                    "conclusion-not-verified-on-truncation"
                }
                .into(),
            );
        }
    }
    Ok(FullReport {
        root_degree: ctx.root_degree(),
        quotients: ctx.quotients.clone(),
        verdicts,
        roots,
        root_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_order_is_fixed() {
        assert_eq!(
            CriterionRegistry::global().names(),
            vec![
                "newton",
                "lemma_q2q3",
                "hutchinson",
                "monotone_classify",
                "thm1_zero_segment",
                "thm2",
                "thm3",
                "lemma2_tail_bound",
                "lemma3_apolar",
                "rouche_zero_count",
                "partial_theta_membership",
                "truncation_real_rooted",
            ]
        );
    }

    #[test]
    fn unknown_criterion_is_rejected() {
        let only = vec!["sturm".to_string()];
        assert!(CriterionRegistry::global().select(Some(&only)).is_err());
    }

    #[test]
    fn selection_keeps_registry_order() {
        let only = vec!["thm2".to_string(), "newton".to_string()];
        let sel = CriterionRegistry::global().select(Some(&only)).unwrap();
        let names: Vec<_> = sel.iter().map(|c| c.name()).collect();
        assert_eq!(names, vec!["newton", "thm2"]);
    }
}
