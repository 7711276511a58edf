use super::{RawRoots, RootFinder, RootOptions};
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

/// Eigenvalues of the Frobenius companion matrix.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompanionMatrix;

impl RootFinder for CompanionMatrix {
    fn name(&self) -> &'static str {
        "companion"
    }

    fn find_roots(&self, coeffs: &[Complex64], _opts: &RootOptions) -> RawRoots {
        let n = coeffs.len() - 1;
        let lead = coeffs[n];
        let roots: Vec<Complex64> = if coeffs.iter().all(|c| c.im == 0.0) {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 1..n {
                m[(i, i - 1)] = 1.0;
            }
            for i in 0..n {
                m[(i, n - 1)] = -coeffs[i].re / lead.re;
            }
            m.complex_eigenvalues().iter().copied().collect()
        } else {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            for i in 1..n {
                m[(i, i - 1)] = Complex64::new(1.0, 0.0);
            }
            for i in 0..n {
                m[(i, n - 1)] = -coeffs[i] / lead;
            }
            match Schur::new(m).eigenvalues() {
                Some(v) => v.iter().copied().collect(),
                None => vec![Complex64::new(f64::NAN, f64::NAN); n],
            }
        };
        let converged = roots.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        RawRoots {
            roots,
            converged,
            iterations: 1,
        }
    }
}
