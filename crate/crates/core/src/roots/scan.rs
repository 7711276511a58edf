//! Sign scans of a series on a real segment.

use super::contour::grid_min;
use crate::error::{Error, Result};
use crate::precision::Precision;
use crate::series::{evaluate_with, CoefficientSeries, EvalResult};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub grid: usize,
    /// Target truncation error for each evaluation.
    pub eps: f64,
    /// Bisection width for the first crossing.
    pub refine_tol: f64,
    pub precision: Precision,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid: 1024,
            eps: 1e-15,
            refine_tol: 1e-12,
            precision: Precision::Double,
        }
    }
}

/// A point with its value and a certified error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub value: f64,
    /// Truncation plus rounding bound on `|value - f(x)|`.
    pub error_bound: f64,
}

impl Witness {
    /// Upper end of the certified enclosure of `f(x)`.
    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentScan {
    pub lo: f64,
    pub hi: f64,
    pub grid: usize,
    /// Deepest point of the segment when it is non-positive.
    pub witness: Option<Witness>,
    /// Leftmost grid sign change, bisected to `refine_tol`.
    pub first_crossing: Option<Witness>,
    /// Smallest value found (grid plus refinement), witness or not.
    pub minimum: Witness,
    /// A missing witness only says that no grid point or refined local
    /// minimum was non-positive; it is not a proof of positivity.
    pub grid_limited: bool,
}

pub fn sign_scan_segment(
    s: &CoefficientSeries,
    lo: f64,
    hi: f64,
    grid: usize,
) -> Result<SegmentScan> {
    sign_scan_segment_with(
        s,
        lo,
        hi,
        &ScanOptions {
            grid,
            ..ScanOptions::default()
        },
    )
}

pub fn sign_scan_segment_with(
    s: &CoefficientSeries,
    lo: f64,
    hi: f64,
    opts: &ScanOptions,
) -> Result<SegmentScan> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!(
            "segment [{lo}, {hi}] is empty or not finite"
        )));
    }
    if opts.grid == 0 {
        return Err(Error::invalid("grid must have at least one cell"));
    }
    let eval = |x: f64| -> Result<EvalResult> {
        let r = evaluate_with(s, x, opts.eps, opts.precision)?;
        if r.is_certified() {
            Ok(r)
        } else {
            Err(Error::UncertainEvaluation {
                x,
                degree: r.truncation_degree,
            })
        }
    };
    let as_witness = |x: f64, r: &EvalResult| Witness {
        x,
        value: r.value,
        error_bound: r.tail_estimate + r.rounding_bound,
    };

    let h = (hi - lo) / opts.grid as f64;
    let xs: Vec<f64> = (0..=opts.grid)
        .map(|i| {
            if i == opts.grid {
                hi
            } else {
                lo + h * i as f64
            }
        })
        .collect();
    let mut vals = Vec::with_capacity(xs.len());
    for &x in &xs {
        vals.push(eval(x)?);
    }

    let first_crossing = match vals.iter().position(|r| r.upper() <= 0.0) {
        None => None,
        Some(0) => Some(as_witness(xs[0], &vals[0])),
        Some(i) => {
            let (mut a, mut b) = (xs[i - 1], xs[i]);
            let mut rb = vals[i].clone();
            while b - a > opts.refine_tol {
                let m = 0.5 * (a + b);
                let rm = eval(m)?;
                if rm.upper() <= 0.0 {
                    b = m;
                    rb = rm;
                } else {
                    a = m;
                }
            }
            Some(as_witness(b, &rb))
        }
    };

    // evaluation never fails past this point: every x lies inside [lo, hi]
    // where the grid evaluations already certified
    let upper_at = |x: f64| eval(x).map(|r| r.upper()).unwrap_or(f64::INFINITY);
    let (xm, _) = grid_min(upper_at, lo, hi, opts.grid);
    let rm = eval(xm)?;
    let mut minimum = as_witness(xm, &rm);
    if let Some(w) = first_crossing {
        if w.upper() < minimum.upper() {
            minimum = w;
        }
    }
    let witness = (minimum.upper() <= 0.0).then_some(minimum);
    Ok(SegmentScan {
        lo,
        hi,
        grid: opts.grid,
        grid_limited: witness.is_none(),
        witness,
        first_crossing,
        minimum,
    })
}
