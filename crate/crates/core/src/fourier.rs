//! Source reconstruction from boundary fields by a truncated Fourier series
//! on `V0`.
//!
//! For `phi_l(x) = exp(i pi l.x / a)` and `k = (pi/a)|l|`, Green's second
//! identity on the disc of radius `rho` gives
//!
//! ```text
//! 4a^2 s_l = oint_{Gamma_rho} (d_nu w + i (pi/a)(l.nu) w) conj(phi_l) ds,
//! ```
//!
//! where `w` is the radiated field at that `k`, propagated from the
//! measurement circle to `Gamma_rho` through its circular-harmonic expansion.
//! The constant term comes from the same integral at `k*` with the
//! non-integer index `l* = (lambda, 0)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use libm::{cos, sin, sqrt};
use num_complex::Complex64;

use crate::forward::ComplexFieldOnCircle;
use crate::specfun::{bessel_j_orders, hankel_h1_orders};
use crate::{Error, Result};

/// Circular-harmonic coefficients `u_n`, `|n| <= n_max`, stored at `n + n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSpectrum {
    pub k: f64,
    pub n_max: usize,
    pub coefficients: Vec<Complex64>,
}

impl AngularSpectrum {
    pub fn get(&self, n: i64) -> Complex64 {
        self.coefficients[(n + self.n_max as i64) as usize]
    }

    /// Largest `|u_n|` with `|n| = order`.
    pub fn order_magnitude(&self, order: usize) -> f64 {
        self.get(order as i64).norm().max(self.get(-(order as i64)).norm())
    }
}

fn check_equispaced(field: &ComplexFieldOnCircle) -> Result<()> {
    let n = field.angles.len();
    if n == 0 || field.values.len() != n {
        return Err(Error::LengthMismatch(field.values.len(), n));
    }
    let step = TAU / n as f64;
    for (i, &t) in field.angles.iter().enumerate() {
        if (t - step * i as f64).abs() > 1e-9 {
            return Err(Error::Data("angles must be equispaced from zero"));
        }
    }
    Ok(())
}

/// Trapezoidal (DFT) coefficients `u_n = (1/2pi) oint u e^{-i n theta}`.
pub fn angular_spectrum(field: &ComplexFieldOnCircle, n_max: usize) -> Result<AngularSpectrum> {
    check_equispaced(field)?;
    let samples = field.values.len();
    if samples <= 2 * n_max {
        return Err(Error::Aliasing { samples, n_max });
    }
    let mut coefficients = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
    for (&theta, &u) in field.angles.iter().zip(&field.values) {
        let step = Complex64::from_polar(1.0, -theta);
        let mut rot = Complex64::new(1.0, 0.0);
        coefficients[n_max] += u;
        for n in 1..=n_max {
            rot *= step;
            coefficients[n_max + n] += u * rot;
            coefficients[n_max - n] += u * rot.conj();
        }
    }
    let scale = 1.0 / samples as f64;
    for c in coefficients.iter_mut() {
        *c *= scale;
    }
    Ok(AngularSpectrum {
        k: field.k,
        n_max,
        coefficients,
    })
}

/// Series truncation for data radiated by a source inside `V0 = (-a, a)^2`.
///
/// The order is the smallest of
/// - the aliasing cap `n_boundary/2 - 1`,
/// - the first order past `k sqrt(2) a` where `|J_n(k sqrt(2) a) H_n(kR)|`,
///   the largest harmonic such a source can radiate, drops below
///   `tolerance` times its peak,
/// - the first order from which the measured spectrum itself stays below
///   `tolerance` times its peak.
///
/// The middle rule matters for noisy data, whose spectrum never decays and
/// whose high harmonics are amplified by inward propagation.
pub fn truncation_order(field: &ComplexFieldOnCircle, a: f64, tolerance: f64) -> Result<usize> {
    check_equispaced(field)?;
    let samples = field.values.len();
    if samples < 4 {
        return Err(Error::Aliasing { samples, n_max: 1 });
    }
    let cap = samples / 2 - 1;

    let t_src = field.k * a * core::f64::consts::SQRT_2;
    let j = bessel_j_orders(cap, t_src)?;
    let h = hankel_orders_clamped(cap, field.k * field.radius)?;
    let envelope: Vec<f64> = j.iter().zip(&h).map(|(j, h)| j.abs() * h.norm()).collect();
    let peak = envelope.iter().cloned().fold(0.0, f64::max);
    let mut n_geo = cap;
    for (n, &e) in envelope.iter().enumerate() {
        if n as f64 >= t_src && e <= tolerance * peak {
            n_geo = n;
            break;
        }
    }

    let spectrum = angular_spectrum(field, cap)?;
    let mags: Vec<f64> = (0..=cap).map(|n| spectrum.order_magnitude(n)).collect();
    let top = mags.iter().cloned().fold(0.0, f64::max);
    let mut n_tail = cap;
    for n in (0..=cap).rev() {
        if mags[n] > tolerance * top {
            break;
        }
        n_tail = n;
    }
    Ok(cap.min(n_geo).min(n_tail))
}

/// `H_n(t)` for `n <= n_max`, truncated where `Y_n` would overflow.
fn hankel_orders_clamped(n_max: usize, t: f64) -> Result<Vec<Complex64>> {
    match hankel_h1_orders(n_max, t) {
        Ok(h) => Ok(h),
        Err(Error::Overflow { order, .. }) if order > 0 => {
            let mut h = hankel_h1_orders(order - 1, t)?;
            let last = *h.last().unwrap();
            h.resize(n_max + 1, last * 1e300);
            Ok(h)
        }
        Err(e) => Err(e),
    }
}

/// `w = sum_n [H_n(k rho)/H_n(kR)] u_n e^{i n theta}` on `Gamma_rho` and its
/// outward normal derivative, at the given angles.
pub fn propagate(
    spectrum: &AngularSpectrum,
    radius: f64,
    rho: f64,
    angles: &[f64],
) -> Result<(ComplexFieldOnCircle, ComplexFieldOnCircle)> {
    let k = spectrum.k;
    let n_max = spectrum.n_max;
    let h_r = hankel_h1_orders(n_max, k * radius)?;
    let h_rho = hankel_h1_orders(n_max + 1, k * rho)?;
    let t = k * rho;
    let mut ratio = Vec::with_capacity(n_max + 1);
    let mut dratio = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let deriv = if n == 0 {
            -h_rho[1]
        } else {
            h_rho[n - 1] - h_rho[n] * (n as f64 / t)
        };
        let r = h_rho[n] / h_r[n];
        let d = deriv * k / h_r[n];
        if !(r.norm().is_finite() && d.norm().is_finite()) {
            return Err(Error::Overflow { order: n, argument: t });
        }
        ratio.push(r);
        dratio.push(d);
    }
    let mut w = Vec::with_capacity(angles.len());
    let mut dw = Vec::with_capacity(angles.len());
    for &theta in angles {
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::new(1.0, 0.0);
        let u0 = spectrum.get(0);
        let mut acc = ratio[0] * u0;
        let mut dacc = dratio[0] * u0;
        for n in 1..=n_max {
            rot *= step;
            // H_{-n} = (-1)^n H_n, so the ratios are even in n
            let pair = spectrum.get(n as i64) * rot + spectrum.get(-(n as i64)) * rot.conj();
            acc += ratio[n] * pair;
            dacc += dratio[n] * pair;
        }
        w.push(acc);
        dw.push(dacc);
    }
    let make = |values| ComplexFieldOnCircle {
        k,
        radius: rho,
        angles: angles.to_vec(),
        values,
    };
    Ok((make(w), make(dw)))
}

/// `oint (dw + i (kappa.nu) w) e^{-i kappa.x} ds` by the trapezoidal rule.
fn boundary_moment(kappa: [f64; 2], w: &ComplexFieldOnCircle, dw: &ComplexFieldOnCircle) -> Result<Complex64> {
    check_equispaced(w)?;
    if dw.values.len() != w.values.len() || dw.radius != w.radius {
        return Err(Error::LengthMismatch(dw.values.len(), w.values.len()));
    }
    let rho = w.radius;
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&theta, &wv), &dv) in w.angles.iter().zip(&w.values).zip(&dw.values) {
        let (s, c) = (sin(theta), cos(theta));
        let kn = kappa[0] * c + kappa[1] * s;
        let phase = Complex64::from_polar(1.0, -rho * kn);
        acc += (dv + Complex64::new(0.0, kn) * wv) * phase;
    }
    Ok(acc * (rho * TAU / w.values.len() as f64))
}

fn check_wavenumber(expected: f64, supplied: f64) -> Result<()> {
    if (expected - supplied).abs() > 1e-10 * expected {
        return Err(Error::WavenumberMismatch { expected, supplied });
    }
    Ok(())
}

/// Fourier coefficient `s_l` from `w`, `dw` on `Gamma_rho` at `k = (pi/a)|l|`.
pub fn fourier_coefficient(
    l: [i32; 2],
    a: f64,
    w: &ComplexFieldOnCircle,
    dw: &ComplexFieldOnCircle,
) -> Result<Complex64> {
    let kappa = [PI * l[0] as f64 / a, PI * l[1] as f64 / a];
    check_wavenumber(sqrt(kappa[0] * kappa[0] + kappa[1] * kappa[1]), w.k)?;
    check_wavenumber(w.k, dw.k)?;
    Ok(boundary_moment(kappa, w, dw)? / (4.0 * a * a))
}

/// `int_{V0} phi_l conj(phi_{l*}) dx` for `l* = (lambda, 0)`.
pub fn basis_overlap(l: [i32; 2], lambda: f64, a: f64) -> f64 {
    if l[1] != 0 {
        return 0.0;
    }
    let d = PI * (l[0] as f64 - lambda);
    let sinc = if d == 0.0 { 1.0 } else { sin(d) / d };
    4.0 * a * a * sinc
}

/// Constant coefficient `s_0` from the fields at `k* = pi lambda / a` and
/// the already computed non-zero coefficients.
pub fn zeroth_coefficient(
    w_star: &ComplexFieldOnCircle,
    dw_star: &ComplexFieldOnCircle,
    coefficients: &[([i32; 2], Complex64)],
    a: f64,
    lambda: f64,
) -> Result<Complex64> {
    let s = sin(lambda * PI);
    if s.abs() < 1e-12 {
        return Err(Error::Config("sin(lambda pi) vanishes"));
    }
    check_wavenumber(PI * lambda / a, w_star.k)?;
    check_wavenumber(w_star.k, dw_star.k)?;
    let moment = boundary_moment([PI * lambda / a, 0.0], w_star, dw_star)?;
    let overlap: Complex64 = coefficients
        .iter()
        .map(|(l, c)| c * basis_overlap(*l, lambda, a))
        .sum();
    Ok((moment - overlap) * (lambda * PI / (4.0 * a * a * s)))
}

/// `S_N(x) = sum_{|l|_inf <= N} s_l exp(i pi l.x / a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierModel {
    pub a: f64,
    pub n: usize,
    /// `s_l` at `(l1 + N)(2N + 1) + (l2 + N)`.
    pub coefficients: Vec<Complex64>,
}

impl FourierModel {
    pub fn zeros(a: f64, n: usize) -> Self {
        let side = 2 * n + 1;
        Self {
            a,
            n,
            coefficients: vec![Complex64::new(0.0, 0.0); side * side],
        }
    }

    fn index(&self, l: [i32; 2]) -> Option<usize> {
        let n = self.n as i32;
        if l[0].abs() > n || l[1].abs() > n {
            return None;
        }
        Some(((l[0] + n) * (2 * n + 1) + (l[1] + n)) as usize)
    }

    /// Zero outside the truncation range.
    pub fn get(&self, l: [i32; 2]) -> Complex64 {
        self.index(l)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coefficients[i])
    }

    pub fn set(&mut self, l: [i32; 2], value: Complex64) -> Result<()> {
        let i = self.index(l).ok_or(Error::Config("index outside the truncation range"))?;
        self.coefficients[i] = value;
        Ok(())
    }

    /// `(l, s_l)` in lexicographic order of `l`.
    pub fn entries(&self) -> impl Iterator<Item = ([i32; 2], Complex64)> + '_ {
        let n = self.n as i32;
        (-n..=n)
            .flat_map(move |l1| (-n..=n).map(move |l2| [l1, l2]))
            .map(move |l| (l, self.get(l)))
    }

    pub fn value(&self, x: [f64; 2]) -> Complex64 {
        self.entries()
            .map(|(l, c)| c * Complex64::from_polar(1.0, PI * (l[0] as f64 * x[0] + l[1] as f64 * x[1]) / self.a))
            .sum()
    }
}

/// Complex samples on the cell-centred `n x n` grid over `V0`, laid out like
/// [`crate::forward::SourceGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub a: f64,
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }
}

/// Evaluate `S_N` on the cell-centred `n_eval x n_eval` grid, one axis at a time.
pub fn evaluate_model(model: &FourierModel, n_eval: usize) -> ComplexGrid {
    let a = model.a;
    let nt = model.n as i32;
    let side = 2 * model.n + 1;
    let h = 2.0 * a / n_eval as f64;
    // e^{i pi l x / a} for every grid coordinate and l in -N..=N
    let phases: Vec<Complex64> = (0..n_eval)
        .flat_map(|i| {
            let x = -a + (i as f64 + 0.5) * h;
            (-nt..=nt).map(move |l| Complex64::from_polar(1.0, PI * l as f64 * x / a))
        })
        .collect();
    let mut values = Vec::with_capacity(n_eval * n_eval);
    let mut partial = vec![Complex64::new(0.0, 0.0); side];
    for row in 0..n_eval {
        let e2 = &phases[row * side..(row + 1) * side];
        for (l1, p) in partial.iter_mut().enumerate() {
            let coeffs = &model.coefficients[l1 * side..(l1 + 1) * side];
            *p = coeffs.iter().zip(e2).map(|(c, e)| c * e).sum();
        }
        for col in 0..n_eval {
            let e1 = &phases[col * side..(col + 1) * side];
            values.push(partial.iter().zip(e1).map(|(p, e)| p * e).sum());
        }
    }
    ComplexGrid {
        a,
        n: n_eval,
        values,
    }
}
