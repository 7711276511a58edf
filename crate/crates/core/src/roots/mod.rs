//! Root finding for truncations and the numeric engines used by the
//! criteria: real-rootedness verdicts, zero counts in disks, minimum modulus
//! on circles and sign scans on real segments.
//!
//! Root finders are strategies behind [`RootFinder`], registered by name in a
//! [`RootFinderRegistry`]. The default pipeline runs `aberth` and falls back
//! to `companion` when the iteration stalls.

mod aberth;
mod companion;
pub mod contour;
pub mod poly;
pub mod scan;

pub use aberth::AberthEhrlich;
pub use companion::CompanionMatrix;
pub use contour::{
    count_series_zeros_in_disk, count_zeros_in_disk, min_modulus_on_circle,
    min_modulus_on_circle_with, CircleMinimum, DiskCount,
};
pub use scan::{sign_scan_segment, sign_scan_segment_with, ScanOptions, SegmentScan, Witness};

use crate::error::{Error, Result};
use num_complex::Complex64;
use poly::backward_error;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootOptions {
    /// Registry name of the primary finder.
    pub method: String,
    /// Tried when the primary does not converge; `None` disables.
    pub fallback: Option<String>,
    /// A root is real when `|Im z| <= im_tol * max(1, |z|)`.
    pub im_tol: f64,
    /// Largest accepted relative backward error `|P(z)| / sum |c_k||z|^k`.
    pub residual_tol: f64,
    /// Roots closer than `simplicity_tol * max(1, |z_i|, |z_j|)` may be multiple.
    pub simplicity_tol: f64,
    /// Conjugate pairs with relative imaginary part below this collapse to a
    /// real multiple root.
    pub cluster_tol: f64,
    pub step_tol: f64,
    pub max_sweeps: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            method: "aberth".into(),
            fallback: Some("companion".into()),
            im_tol: 1e-8,
            residual_tol: 1e-8,
            simplicity_tol: 1e-6,
            cluster_tol: 1e-7,
            step_tol: 1e-13,
            max_sweeps: 200,
        }
    }
}

/// Output of one finder run on a polynomial with nonzero constant and
/// leading coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRoots {
    pub roots: Vec<Complex64>,
    pub converged: bool,
    pub iterations: usize,
}

pub trait RootFinder: Send + Sync {
    fn name(&self) -> &'static str;
    fn find_roots(&self, coeffs: &[Complex64], opts: &RootOptions) -> RawRoots;
}

/// Name-keyed table of root finders.
#[derive(Clone)]
pub struct RootFinderRegistry {
    finders: BTreeMap<&'static str, Arc<dyn RootFinder>>,
}

impl RootFinderRegistry {
    pub fn empty() -> Self {
        RootFinderRegistry {
            finders: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(AberthEhrlich));
        r.register(Arc::new(CompanionMatrix));
        r
    }

    /// Shared registry with the built-in finders.
    pub fn global() -> &'static RootFinderRegistry {
        static GLOBAL: OnceLock<RootFinderRegistry> = OnceLock::new();
        GLOBAL.get_or_init(Self::with_builtins)
    }

    pub fn register(&mut self, finder: Arc<dyn RootFinder>) {
        self.finders.insert(finder.name(), finder);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RootFinder>> {
        self.finders
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "root finder",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.finders.keys().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootVerdict {
    AllRealNegative,
    /// every root real, at least one `>= 0`
    AllReal,
    /// both real and non-real roots
    Mixed,
    /// no real roots
    ComplexPresent,
    Uncertain,
}

impl RootVerdict {
    pub fn is_real_rooted(self) -> bool {
        matches!(self, RootVerdict::AllRealNegative | RootVerdict::AllReal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    pub roots: Vec<Complex64>,
    /// Relative backward errors, one per root.
    pub residuals: Vec<f64>,
    pub verdict: RootVerdict,
    pub im_tol: f64,
    /// `max |z|`
    pub scale: f64,
    pub method: String,
    pub converged: bool,
    pub iterations: usize,
    /// `min |z_i - z_j| / max(1, |z_i|, |z_j|)`; infinite for a single root.
    #[serde(serialize_with = "finite_or_null")]
    pub min_separation: f64,
    pub simple: bool,
    /// Near-real conjugate pairs collapsed to real double roots.
    pub collapsed_pairs: usize,
    /// Near-real roots without a conjugate partner, moved onto the real axis.
    pub snapped_unpaired: usize,
}

fn finite_or_null<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

impl RootReport {
    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn is_real(&self, z: Complex64) -> bool {
        z.im.abs() <= self.im_tol * z.norm().max(1.0)
    }

    pub fn nonreal_count(&self) -> usize {
        self.roots.iter().filter(|&&z| !self.is_real(z)).count()
    }

    pub fn count_inside(&self, radius: f64) -> usize {
        self.roots.iter().filter(|z| z.norm() < radius).count()
    }
}

/// Real-rootedness summary for `is_real_rooted`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealRootedness {
    pub verdict: RootVerdict,
    pub simple: bool,
    pub min_separation: f64,
}

pub fn poly_roots(coeffs: &[f64]) -> Result<RootReport> {
    poly_roots_with(coeffs, &RootOptions::default())
}

pub fn poly_roots_with(coeffs: &[f64], opts: &RootOptions) -> Result<RootReport> {
    let c: Vec<Complex64> = coeffs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    roots_impl(&c, true, opts, RootFinderRegistry::global())
}

pub fn poly_roots_complex(coeffs: &[Complex64], opts: &RootOptions) -> Result<RootReport> {
    let real = coeffs.iter().all(|c| c.im == 0.0);
    roots_impl(coeffs, real, opts, RootFinderRegistry::global())
}

pub fn poly_roots_in(
    registry: &RootFinderRegistry,
    coeffs: &[Complex64],
    opts: &RootOptions,
) -> Result<RootReport> {
    let real = coeffs.iter().all(|c| c.im == 0.0);
    roots_impl(coeffs, real, opts, registry)
}

pub fn is_real_rooted(coeffs: &[f64], im_tol: f64) -> Result<RealRootedness> {
    let opts = RootOptions {
        im_tol,
        ..RootOptions::default()
    };
    let r = poly_roots_with(coeffs, &opts)?;
    Ok(RealRootedness {
        verdict: r.verdict,
        simple: r.simple,
        min_separation: r.min_separation,
    })
}

fn roots_impl(
    coeffs: &[Complex64],
    real_coeffs: bool,
    opts: &RootOptions,
    registry: &RootFinderRegistry,
) -> Result<RootReport> {
    if coeffs
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::invalid("polynomial coefficients must be finite"));
    }
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Err(Error::invalid("polynomial of degree 0 has no roots"));
    }
    if coeffs[degree].norm() == 0.0 {
        return Err(Error::invalid("leading coefficient is zero"));
    }
    let zeros_at_origin = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &coeffs[zeros_at_origin..];

    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    let mut method = String::from("exact");
    let mut converged = true;
    let mut iterations = 0;
    if reduced.len() > 1 {
        let primary = registry.get(&opts.method)?;
        let mut raw = primary.find_roots(reduced, opts);
        method = primary.name().to_string();
        if !raw.converged {
            if let Some(fb) = &opts.fallback {
                let fallback = registry.get(fb)?;
                let alt = fallback.find_roots(reduced, opts);
                if worst_residual(reduced, &alt.roots) < worst_residual(reduced, &raw.roots) {
                    method = format!("{}+{}", primary.name(), fallback.name());
                    raw = RawRoots {
                        converged: alt.converged,
                        iterations: raw.iterations + alt.iterations,
                        roots: alt.roots,
                    };
                }
            }
        }
        converged = raw.converged;
        iterations = raw.iterations;
        roots.extend(raw.roots);
    }

    let mut collapsed_pairs = 0;
    let mut snapped_unpaired = 0;
    let mut clustered = vec![false; roots.len()];
    if real_coeffs {
        collapsed_pairs = collapse_near_real_pairs(&mut roots, &mut clustered, opts.cluster_tol);
        snapped_unpaired = snap_unpaired(&mut roots, opts.im_tol);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let residuals: Vec<f64> = roots.iter().map(|&z| backward_error(coeffs, z)).collect();
    let scale = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_separation = min_relative_separation(&roots);
    let simple = collapsed_pairs == 0 && min_separation > opts.simplicity_tol;

    let finite = roots.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    let residual_ok = residuals.iter().all(|&r| r <= opts.residual_tol);
    let is_real = |z: &Complex64| z.im.abs() <= opts.im_tol * z.norm().max(1.0);
    let verdict = if !finite || !residual_ok {
        RootVerdict::Uncertain
    } else {
        let real = roots.iter().filter(|z| is_real(z)).count();
        if real == roots.len() {
            if roots.iter().all(|z| z.re < 0.0) {
                RootVerdict::AllRealNegative
            } else {
                RootVerdict::AllReal
            }
        } else if real == 0 {
            RootVerdict::ComplexPresent
        } else {
            RootVerdict::Mixed
        }
    };

    Ok(RootReport {
        roots,
        residuals,
        verdict,
        im_tol: opts.im_tol,
        scale,
        method,
        converged,
        iterations,
        min_separation,
        simple,
        collapsed_pairs,
        snapped_unpaired,
    })
}

fn worst_residual(coeffs: &[Complex64], roots: &[Complex64]) -> f64 {
    roots
        .iter()
        .map(|&z| {
            let r = backward_error(coeffs, z);
            if r.is_finite() {
                r
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Iterates for a real double root of a real polynomial usually land on a
/// conjugate pair `x +- i y` with `y ~ sqrt(eps) |x|`; such pairs become `x, x`.
fn collapse_near_real_pairs(
    roots: &mut [Complex64],
    clustered: &mut [bool],
    cluster_tol: f64,
) -> usize {
    let mut pairs = 0;
    for i in 0..roots.len() {
        if clustered[i] || roots[i].im == 0.0 {
            continue;
        }
        let zi = roots[i];
        let scale = zi.norm().max(1.0);
        if zi.im.abs() > cluster_tol * scale {
            continue;
        }
        let partner = (0..roots.len())
            .filter(|&j| j != i && !clustered[j])
            .filter(|&j| (roots[j] - zi.conj()).norm() <= 2.0 * cluster_tol * scale)
            .min_by(|&a, &b| {
                (roots[a] - zi.conj())
                    .norm()
                    .total_cmp(&(roots[b] - zi.conj()).norm())
            });
        if let Some(j) = partner {
            let x = 0.5 * (zi.re + roots[j].re);
            roots[i] = Complex64::new(x, 0.0);
            roots[j] = Complex64::new(x, 0.0);
            clustered[i] = true;
            clustered[j] = true;
            pairs += 1;
        }
    }
    pairs
}

/// Non-real roots of a real polynomial come in conjugate pairs. A near-real
/// root (`|Im z| <= UNPAIRED_TOL |z|`) with nothing near its conjugate is a
/// real root the iteration left slightly off the axis.
fn snap_unpaired(roots: &mut [Complex64], im_tol: f64) -> usize {
    const UNPAIRED_TOL: f64 = 1e-6;
    let n = roots.len();
    let offaxis = |z: Complex64| z.im.abs() > im_tol * z.norm().max(1.0);
    let mut paired = vec![false; n];
    let mut snapped = 0;
    for i in 0..n {
        let zi = roots[i];
        if paired[i] || !offaxis(zi) {
            continue;
        }
        let partner = (0..n)
            .filter(|&j| j != i && !paired[j] && offaxis(roots[j]))
            .filter(|&j| (roots[j] - zi.conj()).norm() <= 0.5 * zi.im.abs())
            .min_by(|&a, &b| {
                (roots[a] - zi.conj())
                    .norm()
                    .total_cmp(&(roots[b] - zi.conj()).norm())
            });
        match partner {
            Some(j) => {
                paired[i] = true;
                paired[j] = true;
            }
            None if zi.im.abs() <= UNPAIRED_TOL * zi.norm().max(1.0) => {
                roots[i] = Complex64::new(zi.re, 0.0);
                snapped += 1;
            }
            None => {}
        }
    }
    snapped
}

fn min_relative_separation(roots: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let s = roots[i].norm().max(roots[j].norm()).max(1.0);
            best = best.min((roots[i] - roots[j]).norm() / s);
        }
    }
    best
}
