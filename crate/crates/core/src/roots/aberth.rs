use super::poly::{cdiv, newton_correction, UNIT_ROUNDOFF};
use super::{RawRoots, RootFinder, RootOptions};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Ehrlich-Aberth simultaneous iteration (Gauss-Seidel sweeps) started from
/// the Newton polygon of the coefficient moduli.
#[derive(Debug, Default, Clone, Copy)]
pub struct AberthEhrlich;

impl RootFinder for AberthEhrlich {
    fn name(&self) -> &'static str {
        "aberth"
    }

    fn find_roots(&self, coeffs: &[Complex64], opts: &RootOptions) -> RawRoots {
        let n = coeffs.len() - 1;
        let mut z = initial_guesses(coeffs);
        let mut done = vec![false; n];
        let stop_backward = 4.0 * (n as f64 + 1.0) * UNIT_ROUNDOFF;
        let mut sweeps = 0;
        while sweeps < opts.max_sweeps && done.iter().any(|d| !d) {
            sweeps += 1;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let (ratio, be) = newton_correction(coeffs, z[i]);
                if be <= stop_backward {
                    done[i] = true;
                    continue;
                }
                let mut repulsion = Complex64::new(0.0, 0.0);
                for (j, &zj) in z.iter().enumerate() {
                    if j != i {
                        let d = z[i] - zj;
                        if d.norm() > 0.0 {
                            repulsion += cdiv(Complex64::new(1.0, 0.0), d);
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
                let step = if denom.norm() > 0.0 {
                    cdiv(ratio, denom)
                } else {
                    ratio
                };
                if !step.re.is_finite() || !step.im.is_finite() {
                    continue;
                }
                z[i] -= step;
                if step.norm() <= opts.step_tol * z[i].norm().max(f64::MIN_POSITIVE) {
                    done[i] = true;
                }
            }
        }
        let converged =
            done.iter().all(|&d| d) && z.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        RawRoots {
            roots: z,
            converged,
            iterations: sweeps,
        }
    }
}

/// Upper convex hull of `(k, ln|c_k|)`; each hull edge `i -> j` contributes
/// `j - i` guesses on the circle of radius `(|c_i| / |c_j|)^{1/(j-i)}`.
pub(super) fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 {
            let (k1, l1) = hull[hull.len() - 2];
            let (k2, l2) = hull[hull.len() - 1];
            // drop the middle point when it lies on or below the chord
            let cross = (k2 as f64 - k1 as f64) * (p.1 - l1) - (l2 - l1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let m = j - i;
        let radius = ((li - lj) / m as f64).exp();
        let offset = 0.7 + TAU * i as f64 / n as f64;
        for l in 0..m {
            let theta = TAU * l as f64 / m as f64 + offset;
            guesses.push(Complex64::from_polar(radius, theta));
        }
    }
    guesses
}
