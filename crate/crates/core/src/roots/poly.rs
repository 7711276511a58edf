use num_complex::Complex64;

/// Unit roundoff of binary64.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// `gamma_m = m u / (1 - m u)`, the standard Horner error factor.
pub fn gamma(m: usize) -> f64 {
    let mu = m as f64 * UNIT_ROUNDOFF;
    mu / (1.0 - mu)
}

/// `P(z)` for coefficients in ascending order.
pub fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn horner_complex(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn horner_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `sum |c_k| r^k`
pub fn abs_sum(coeffs: &[f64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c.abs())
}

/// `a / b` by Smith's method, which avoids forming `|b|^2`.
pub fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        Complex64::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        Complex64::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

/// Newton correction `P(z)/P'(z)` and the relative backward error
/// `|P(z)| / sum |c_k| |z|^k`. Outside the unit disk the reversed polynomial
/// is used so that `z^n` never forms.
pub fn newton_correction(coeffs: &[Complex64], z: Complex64) -> (Complex64, f64) {
    let n = coeffs.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    if z.norm() <= 1.0 {
        let mut p = zero;
        let mut dp = zero;
        let mut s = 0.0;
        let az = z.norm();
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
            s = s * az + c.norm();
        }
        let be = if s > 0.0 { p.norm() / s } else { 0.0 };
        if p == zero {
            return (zero, 0.0);
        }
        if dp == zero {
            return (p, be);
        }
        (cdiv(p, dp), be)
    } else {
        let w = cdiv(Complex64::new(1.0, 0.0), z);
        let aw = w.norm();
        let mut r = zero;
        let mut dr = zero;
        let mut s = 0.0;
        // R(w) = sum c_{n-k} w^k: Horner from c_0 up to c_n
        for &c in coeffs.iter() {
            dr = dr * w + r;
            r = r * w + c;
            s = s * aw + c.norm();
        }
        let be = if s > 0.0 { r.norm() / s } else { 0.0 };
        if r == zero {
            return (zero, 0.0);
        }
        let denom = Complex64::new(n as f64, 0.0) - w * cdiv(dr, r);
        if denom == zero {
            return (z, be);
        }
        (cdiv(z, denom), be)
    }
}

/// Relative backward error of `z` as a root.
pub fn backward_error(coeffs: &[Complex64], z: Complex64) -> f64 {
    newton_correction(coeffs, z).1
}

/// Golden-section minimum of `f` on `[a, b]`, stopping at width `tol`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_division_survives_tiny_denominators() {
        let b = Complex64::new(3e-173, -4e-173);
        let q = cdiv(Complex64::new(6e-173, 8e-173), b);
        assert!((q - Complex64::new(-0.56, 1.92)).norm() < 1e-15);
        assert!(
            (cdiv(Complex64::new(1.0, 2.0), Complex64::new(0.5, -1.5))
                - Complex64::new(1.0, 2.0) / Complex64::new(0.5, -1.5))
            .norm()
                < 1e-15
        );
    }

    #[test]
    fn correction_matches_direct_ratio() {
        let c: Vec<Complex64> = [2.0, -3.0, 0.5, 1.0]
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        for z in [Complex64::new(0.3, 0.2), Complex64::new(4.0, -1.5)] {
            let (ratio, _) = newton_correction(&c, z);
            let p = horner_complex(&c, z);
            let dp = horner_complex(&[c[1], c[2] * 2.0, c[3] * 3.0], z);
            assert!((ratio - p / dp).norm() < 1e-12 * (p / dp).norm());
        }
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, fx) = golden_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }
}
