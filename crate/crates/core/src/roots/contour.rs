//! Circle scans: minimum modulus and argument-principle zero counts.

use super::poly::{gamma, golden_min};
use crate::error::{Error, Result};
use crate::series::{tail_majorant, CoefficientSeries};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Default number of grid points on a circle.
pub const CIRCLE_GRID: usize = 4096;
/// A count is refused unless the contour minimum exceeds this multiple of
/// the evaluation error bound.
pub const GUARD_FACTOR: f64 = 10.0;

const REFINE_CANDIDATES: usize = 8;
const MAX_BISECTIONS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleMinimum {
    /// Minimizer; in `[0, pi]` for real coefficients.
    pub theta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiskCount {
    pub radius: f64,
    pub count: usize,
    pub winding_samples: usize,
    pub min_modulus_on_contour: f64,
    /// Bound on `|f_computed - f|` along the contour.
    pub error_bound: f64,
}

/// `min_theta |P(r e^{i theta})|` for real coefficients in ascending order.
pub fn min_modulus_on_circle(coeffs: &[f64], radius: f64) -> Result<CircleMinimum> {
    min_modulus_on_circle_with(coeffs, radius, CIRCLE_GRID)
}

pub fn min_modulus_on_circle_with(
    coeffs: &[f64],
    radius: f64,
    grid: usize,
) -> Result<CircleMinimum> {
    if coeffs.len() < 2 {
        return Err(Error::invalid("circle minimum needs degree >= 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius {radius} must be positive")));
    }
    let f = |t: f64| super::poly::horner(coeffs, Complex64::from_polar(radius, t)).norm();
    let (theta, value) = grid_min(f, 0.0, PI, grid.max(8) / 2);
    Ok(CircleMinimum { theta, value })
}

/// Grid minimum of `f` on `[lo, hi]` with `cells` cells, refined by golden
/// section around the best local minima.
pub(crate) fn grid_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cells: usize) -> (f64, f64) {
    let h = (hi - lo) / cells as f64;
    let vals: Vec<f64> = (0..=cells).map(|i| f(lo + h * i as f64)).collect();
    let mut minima: Vec<usize> = (0..=cells)
        .filter(|&i| {
            let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
            let right = if i == cells {
                f64::INFINITY
            } else {
                vals[i + 1]
            };
            vals[i] <= left && vals[i] <= right
        })
        .collect();
    minima.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    minima.truncate(REFINE_CANDIDATES);
    let mut best = minima
        .first()
        .map(|&i| (lo + h * i as f64, vals[i]))
        .unwrap_or((lo, vals[0]));
    for &i in &minima {
        let a = lo + h * i.saturating_sub(1) as f64;
        let b = lo + h * (i + 1).min(cells) as f64;
        let (x, fx) = golden_min(&f, a, b, 1e-13 * (1.0 + hi.abs().max(lo.abs())));
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Zeros of the polynomial inside `|z| < radius`.
pub fn count_zeros_in_disk(coeffs: &[f64], radius: f64) -> Result<DiskCount> {
    if coeffs.is_empty() {
        return Err(Error::invalid("empty polynomial"));
    }
    check_radius(radius)?;
    let n = coeffs.len() - 1;
    let abs_sum = super::poly::abs_sum(coeffs, radius);
    let error_bound = gamma(2 * n.max(1)) * abs_sum;
    winding(
        |t| super::poly::horner(coeffs, Complex64::from_polar(radius, t)),
        radius,
        error_bound,
        4 * n + 64,
    )
}

/// Zeros of `f` (or of its degree-`eval_degree` section for a polynomial
/// series) inside `|z| < radius`. The tail beyond `eval_degree` enters the
/// contour guard through its geometric majorant.
pub fn count_series_zeros_in_disk(
    s: &CoefficientSeries,
    radius: f64,
    eval_degree: usize,
) -> Result<DiskCount> {
    check_radius(radius)?;
    if eval_degree > s.degree() {
        return Err(Error::invalid(format!(
            "evaluation degree {eval_degree} exceeds materialized degree {}",
            s.degree()
        )));
    }
    let tail = tail_majorant(s, eval_degree, radius).ok_or(Error::UncertainEvaluation {
        x: radius,
        degree: s.degree(),
    })?;
    let ratios = &s.ratios()[..eval_degree];
    let mut t = s.a0();
    let mut abs_sum = t;
    for &p in ratios {
        t = t * radius / p;
        abs_sum += t;
    }
    let error_bound = gamma(2 * eval_degree.max(1)) * abs_sum + tail;
    let a0 = s.a0();
    let eval = |theta: f64| {
        let z = Complex64::from_polar(radius, theta);
        let mut term = Complex64::new(a0, 0.0);
        let mut acc = term;
        for &p in ratios {
            term = term * z / p;
            acc += term;
        }
        acc
    };
    winding(eval, radius, error_bound, 4 * eval_degree + 64)
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("radius {radius} must be positive")))
    }
}

/// Winding number of `theta -> f(theta)` over `[0, 2 pi]`. Cells are halved
/// until every phase increment is below `pi/2`; the contour minimum is then
/// refined around the smallest samples before the guard is applied.
fn winding<F: Fn(f64) -> Complex64>(
    f: F,
    radius: f64,
    error_bound: f64,
    initial: usize,
) -> Result<DiskCount> {
    let h = TAU / initial as f64;
    let mut samples = 0usize;
    let mut total = 0.0;
    let mut min_sample = f64::INFINITY;
    let mut prev_t = 0.0;
    let mut prev = f(0.0);
    samples += 1;
    min_sample = min_sample.min(prev.norm());
    let guard_ok = |m: f64| m > GUARD_FACTOR * error_bound;
    for i in 1..=initial {
        let t1 = if i == initial { TAU } else { h * i as f64 };
        let v1 = if i == initial { f(0.0) } else { f(t1) };
        samples += 1;
        // refine [prev_t, t1] depth-first in order
        let mut stack = vec![(prev_t, prev, t1, v1, 0usize)];
        while let Some((a, fa, b, fb, depth)) = stack.pop() {
            min_sample = min_sample.min(fb.norm());
            let d = phase_step(fa, fb);
            if d.abs() < FRAC_PI_2 {
                total += d;
                continue;
            }
            if depth >= MAX_BISECTIONS || fa.norm() == 0.0 || fb.norm() == 0.0 {
                return Err(Error::ContourTooClose {
                    radius,
                    min_modulus: min_sample.min(fa.norm()).min(fb.norm()),
                    error_bound,
                    guard_factor: GUARD_FACTOR,
                });
            }
            let m = 0.5 * (a + b);
            let fm = f(m);
            samples += 1;
            // right half is processed after the left half
            stack.push((m, fm, b, fb, depth + 1));
            stack.push((a, fa, m, fm, depth + 1));
        }
        prev_t = t1;
        prev = v1;
    }
    let (_, refined) = grid_min(|t| f(t).norm(), 0.0, TAU, initial);
    let min_modulus = min_sample.min(refined);
    if !guard_ok(min_modulus) {
        return Err(Error::ContourTooClose {
            radius,
            min_modulus,
            error_bound,
            guard_factor: GUARD_FACTOR,
        });
    }
    let turns = total / TAU;
    let count = turns.round();
    if (turns - count).abs() > 1e-6 || count < 0.0 {
        return Err(Error::ContourTooClose {
            radius,
            min_modulus,
            error_bound,
            guard_factor: GUARD_FACTOR,
        });
    }
    Ok(DiskCount {
        radius,
        count: count as usize,
        winding_samples: samples,
        min_modulus_on_contour: min_modulus,
        error_bound,
    })
}

/// `arg(b / a)` in `(-pi, pi]`.
fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b * a.conj()).arg()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::CoefficientSeries;

    #[test]
    fn identity_has_unit_minimum() {
        let m = min_modulus_on_circle(&[0.0, 1.0], 1.0).unwrap();
        assert!((m.value - 1.0).abs() < 1e-14);
        assert!((0.0..=PI).contains(&m.theta));
    }

    #[test]
    fn minimum_locates_root_on_circle() {
        // z^2 + 1 vanishes at theta = pi/2 on the unit circle
        let m = min_modulus_on_circle(&[1.0, 0.0, 1.0], 1.0).unwrap();
        assert!(m.value < 1e-10);
        assert!((m.theta - FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn constant_has_no_zeros() {
        let c = count_zeros_in_disk(&[1.0], 5.0).unwrap();
        assert_eq!(c.count, 0);
    }

    #[test]
    fn both_roots_of_z2_minus_1_inside_radius_2() {
        assert_eq!(
            count_zeros_in_disk(&[-1.0, 0.0, 1.0], 2.0).unwrap().count,
            2
        );
        assert_eq!(
            count_zeros_in_disk(&[-1.0, 0.0, 1.0], 0.5).unwrap().count,
            0
        );
    }

    #[test]
    fn contour_through_root_is_refused() {
        let err = count_zeros_in_disk(&[-1.0, 0.0, 1.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::ContourTooClose { .. }));
    }

    #[test]
    fn theta_series_matches_its_quartic_section() {
        let s = CoefficientSeries::partial_theta(2.0, 64)
            .unwrap()
            .normalize();
        let full = count_series_zeros_in_disk(&s, 4.0, 40).unwrap();
        let quartic = count_zeros_in_disk(&s.section_coefficients(4, false), 4.0).unwrap();
        assert_eq!(full.count, quartic.count);
    }
}
