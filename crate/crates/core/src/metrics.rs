//! Discrete relative errors.

use num_complex::Complex64;

use crate::{Error, Result};

/// `(||u - v||_2 / ||u||_2, max|u - v| / max|u|)` over paired samples.
pub fn relative_errors(exact: &[Complex64], approx: &[Complex64]) -> Result<(f64, f64)> {
    if exact.len() != approx.len() {
        return Err(Error::LengthMismatch(exact.len(), approx.len()));
    }
    let (mut num2, mut den2, mut num_inf, mut den_inf) = (0.0, 0.0, 0.0f64, 0.0f64);
    for (u, v) in exact.iter().zip(approx) {
        let d = (u - v).norm();
        let m = u.norm();
        num2 += d * d;
        den2 += m * m;
        num_inf = num_inf.max(d);
        den_inf = den_inf.max(m);
    }
    if !(den_inf > 0.0) {
        return Err(Error::UndefinedMetric);
    }
    Ok((libm::sqrt(num2 / den2), num_inf / den_inf))
}

/// Relative `l2` distance of complex samples from real reference values.
pub fn relative_l2_real(exact: &[f64], approx: &[Complex64]) -> Result<f64> {
    if exact.len() != approx.len() {
        return Err(Error::LengthMismatch(exact.len(), approx.len()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&s, v) in exact.iter().zip(approx) {
        num += (v - s).norm_sqr();
        den += s * s;
    }
    if !(den > 0.0) {
        return Err(Error::UndefinedMetric);
    }
    Ok(libm::sqrt(num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn homogeneity_and_identity() {
        let u: Vec<Complex64> = (0..50).map(|i| Complex64::new(i as f64, 1.0 - i as f64 * 0.3)).collect();
        assert_eq!(relative_errors(&u, &u).unwrap(), (0.0, 0.0));
        let v: Vec<Complex64> = u.iter().map(|x| x * 1.01).collect();
        let (l2, linf) = relative_errors(&u, &v).unwrap();
        assert!((l2 - 0.01).abs() < 1e-14 && (linf - 0.01).abs() < 1e-14);
        let zero = [Complex64::new(0.0, 0.0); 3];
        assert_eq!(relative_errors(&zero, &zero), Err(Error::UndefinedMetric));
        assert!(relative_errors(&u, &v[..3]).is_err());
    }

    #[test]
    fn real_reference() {
        let s = [1.0, -2.0, 2.0];
        let v = [Complex64::new(1.0, 0.3), Complex64::new(-2.0, 0.0), Complex64::new(2.0, -0.4)];
        assert!((relative_l2_real(&s, &v).unwrap() - 0.5 / 3.0).abs() < 1e-15);
    }
}
