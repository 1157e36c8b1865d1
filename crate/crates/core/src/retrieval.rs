//! Pointwise phase retrieval from `|u|` and two reference measurements.
//!
//! With `Phi = (i/4) H0` and `v = u - c Phi`,
//!
//! ```text
//! (2/c)(|v|^2 - |u|^2) - (c/8)|H0(kr)|^2 = Y0(kr) Re u - J0(kr) Im u,
//! ```
//!
//! so the two reference sources of a sector give a real 2x2 system for
//! `(Re u, Im u)` at each measurement point.

use alloc::vec;
use alloc::vec::Vec;

use libm::hypot;
use num_complex::Complex64;

use crate::forward::PhaselessRecord;
use crate::scene::{circle_points, SceneConfig, Wavenumber};
use crate::specfun::jy01;
use crate::{Error, Point, Result};

/// Hard floor on `|det A|`; the analytic bound sits orders of magnitude above.
pub const SINGULAR_DET: f64 = 1e-14;

/// The 2x2 system at one measurement point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalMatrixSample {
    pub k: f64,
    /// `|x - z_{j,1}|`, `|x - z_{j,2}|`.
    pub r: [f64; 2],
    /// Rows `[Y0(k r_l), -J0(k r_l)]`.
    pub a: [[f64; 2]; 2],
    pub f: [f64; 2],
}

impl RetrievalMatrixSample {
    pub fn new(k: f64, x: Point, z: [Point; 2], f: [f64; 2]) -> Self {
        let mut r = [0.0; 2];
        let mut a = [[0.0; 2]; 2];
        for l in 0..2 {
            r[l] = hypot(x[0] - z[l][0], x[1] - z[l][1]);
            let p = jy01(k * r[l]);
            a[l] = [p.y0, -p.j0];
        }
        Self { k, r, a, f }
    }

    pub fn det(&self) -> f64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }
}

/// `f = (2/c)(|v|^2 - |u|^2) - (c/8)|H0(kr)|^2`.
pub fn rhs_value(abs_u: f64, abs_v: f64, c: f64, k: f64, r: f64) -> f64 {
    let h0 = jy01(k * r).h0().norm_sqr();
    2.0 / c * (abs_v * abs_v - abs_u * abs_u) - c / 8.0 * h0
}

/// Right-hand side for reference source `l` (1 or 2) at measurement `index`.
pub fn rhs_f(record: &PhaselessRecord, cfg: &SceneConfig, w: &Wavenumber, l: usize, index: usize) -> Result<f64> {
    let j = record.sector[index];
    let c = record.scaling[j - 1][l - 1];
    if !(c > 0.0) {
        return Err(Error::DegenerateAmplitude { sector: j, k: w.k });
    }
    let layout = cfg.layout_for(w);
    let x = circle_points(record.radius, &record.angles[index..=index])[0];
    let z = layout.point(j, l);
    let r = hypot(x[0] - z[0], x[1] - z[1]);
    Ok(rhs_value(record.abs_u[index], record.abs_v[l - 1][index], c, w.k, r))
}

/// Cramer's rule on `A (Re u, Im u)^T = f`.
pub fn solve_point(sample: &RetrievalMatrixSample) -> Result<Complex64> {
    let det = sample.det();
    if !(det.abs() >= SINGULAR_DET) {
        return Err(Error::SingularSystem { sector: 0, det });
    }
    let [[a11, a12], [a21, a22]] = sample.a;
    let [f1, f2] = sample.f;
    Ok(Complex64::new(
        (f1 * a22 - a12 * f2) / det,
        (a11 * f2 - a21 * f1) / det,
    ))
}

/// Lower bound on `|det A_{j,k}|` guaranteed by the reference-source geometry.
pub fn det_bound(cfg: &SceneConfig, w: &Wavenumber) -> f64 {
    if w.is_star() {
        4.0 / 9.0
    } else {
        (1.0 - 7.0 / (20.0 * cfg.tau)) / (w.k * cfg.radius_for(w))
    }
}

/// `C_eps = (2.5 (2 + eps)^2 (3 + eps) + 15) / (1 - eps)`.
pub fn stability_envelope(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain {
            what: "noise level",
            value: epsilon,
            domain: "(0, 1)",
        });
    }
    let e = epsilon;
    Ok((2.5 * (2.0 + e) * (2.0 + e) * (3.0 + e) + 15.0) / (1.0 - e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorDiagnostics {
    /// 1-based sector index.
    pub sector: usize,
    pub min_abs_det: f64,
    pub bound: f64,
}

impl SectorDiagnostics {
    /// `min |det A| / bound - 1`; negative means the bound was breached.
    pub fn margin(&self) -> f64 {
        self.min_abs_det / self.bound - 1.0
    }
}

/// Retrieved complex field on the whole measurement circle.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievedField {
    pub k: f64,
    pub radius: f64,
    pub angles: Vec<f64>,
    pub sector: Vec<usize>,
    pub values: Vec<Complex64>,
    pub diagnostics: Vec<SectorDiagnostics>,
}

impl RetrievedField {
    pub fn bound_holds(&self) -> bool {
        self.diagnostics.iter().all(|d| d.min_abs_det >= d.bound)
    }

    /// Indices of the samples on sector `j` (1-based).
    pub fn sector_indices(&self, j: usize) -> Vec<usize> {
        (0..self.sector.len()).filter(|&i| self.sector[i] == j).collect()
    }
}

/// Retrieve `u` at every measurement point of sector `j` (1-based).
pub fn retrieve_sector(
    record: &PhaselessRecord,
    cfg: &SceneConfig,
    w: &Wavenumber,
    j: usize,
) -> Result<(Vec<(usize, Complex64)>, SectorDiagnostics)> {
    if (record.k - w.k).abs() > 1e-12 * w.k {
        return Err(Error::WavenumberMismatch {
            expected: w.k,
            supplied: record.k,
        });
    }
    let layout = cfg.layout_for(w);
    let z = layout.points[j - 1];
    let c = record.scaling[j - 1];
    if !(c[0] > 0.0 && c[1] > 0.0) {
        return Err(Error::DegenerateAmplitude { sector: j, k: w.k });
    }
    let mut out = Vec::new();
    let mut min_abs_det = f64::INFINITY;
    for (i, &theta) in record.angles.iter().enumerate() {
        if record.sector[i] != j {
            continue;
        }
        let x = [record.radius * libm::cos(theta), record.radius * libm::sin(theta)];
        let mut sample = RetrievalMatrixSample::new(w.k, x, z, [0.0; 2]);
        for l in 0..2 {
            sample.f[l] = rhs_value(record.abs_u[i], record.abs_v[l][i], c[l], w.k, sample.r[l]);
        }
        min_abs_det = min_abs_det.min(sample.det().abs());
        let u = solve_point(&sample).map_err(|e| match e {
            Error::SingularSystem { det, .. } => Error::SingularSystem { sector: j, det },
            e => e,
        })?;
        out.push((i, u));
    }
    Ok((
        out,
        SectorDiagnostics {
            sector: j,
            min_abs_det,
            bound: det_bound(cfg, w),
        },
    ))
}

/// Retrieve `u` on all sectors.
pub fn retrieve_all(record: &PhaselessRecord, cfg: &SceneConfig, w: &Wavenumber) -> Result<RetrievedField> {
    let n = record.angles.len();
    if record.sector.len() != n || record.abs_u.len() != n || record.abs_v.iter().any(|v| v.len() != n) {
        return Err(Error::Data("incomplete phaseless record"));
    }
    if record.scaling.len() != cfg.m || record.sector.iter().any(|&j| j == 0 || j > cfg.m) {
        return Err(Error::Data("record sectors do not match the configuration"));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut diagnostics = Vec::with_capacity(cfg.m);
    for j in 1..=cfg.m {
        let (samples, diag) = retrieve_sector(record, cfg, w, j)?;
        for (i, u) in samples {
            values[i] = u;
        }
        diagnostics.push(diag);
    }
    Ok(RetrievedField {
        k: w.k,
        radius: record.radius,
        angles: record.angles.clone(),
        sector: record.sector.clone(),
        values,
        diagnostics,
    })
}

/// Minimum of `|det A_{j,k}|` over `n_angles` equispaced angles spanning the
/// closed arc of sector `j`.
pub fn sector_det_minimum(cfg: &SceneConfig, w: &Wavenumber, j: usize, n_angles: usize) -> f64 {
    let layout = cfg.layout_for(w);
    let z = layout.points[j - 1];
    let width = core::f64::consts::TAU / cfg.m as f64;
    let start = (j - 1) as f64 * width;
    let steps = n_angles.max(2) - 1;
    (0..=steps)
        .map(|i| {
            let theta = start + width * i as f64 / steps as f64;
            let x = [layout.radius * libm::cos(theta), layout.radius * libm::sin(theta)];
            RetrievalMatrixSample::new(w.k, x, z, [0.0; 2]).det().abs()
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{measure_field, point_source_field, ComplexFieldOnCircle};
    use core::f64::consts::PI;

    #[test]
    fn envelope_values() {
        assert!((stability_envelope(1e-12).unwrap() - 45.0).abs() < 1e-9);
        let c1 = (2.5 * 2.01f64.powi(2) * 3.01 + 15.0) / 0.99;
        assert!((stability_envelope(0.01).unwrap() - c1).abs() < 1e-12);
        assert!((c1 - 45.87).abs() < 0.01);
        assert!((stability_envelope(0.05).unwrap() - 49.52).abs() < 0.01);
        for bad in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(stability_envelope(bad), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn det_bound_values() {
        let cfg = SceneConfig::default();
        let set = cfg.wavenumbers().unwrap();
        let w = *set.find(10.0 * PI / 3.0).unwrap();
        let want = (1.0 - 7.0 / 120.0) / (6.0 * PI);
        assert!((det_bound(&cfg, &w) - want).abs() < 1e-15);
        assert!((want - 0.04996).abs() < 1e-5);
        assert_eq!(det_bound(&cfg, set.star()), 4.0 / 9.0);
        let wide = SceneConfig { tau: 1e9, ..cfg };
        let w = wide.wavenumbers().unwrap().find(PI / 0.3).copied().unwrap();
        let m = det_bound(&wide, &w) * w.k * wide.radius_for(&w);
        assert!((m - 1.0).abs() < 1e-8);
    }

    #[test]
    fn trivial_solves() {
        let s = RetrievalMatrixSample {
            k: 1.0,
            r: [1.0, 1.0],
            a: [[1.0, 0.0], [0.0, -1.0]],
            f: [0.3, -0.7],
        };
        assert_eq!(solve_point(&s).unwrap(), Complex64::new(0.3, 0.7));
        let zero = RetrievalMatrixSample { f: [0.0, 0.0], ..s };
        assert_eq!(solve_point(&zero).unwrap(), Complex64::new(0.0, 0.0));
        let singular = RetrievalMatrixSample {
            a: [[1.0, 2.0], [0.5, 1.0]],
            ..s
        };
        assert!(matches!(solve_point(&singular), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn rhs_cancels_for_vanishing_field() {
        // |v| = |Phi| when u = 0 and c = 1
        for (k, r) in [(0.3, 1.2), (10.0, 0.9), (150.0, 1.6)] {
            let abs_v = 0.25 * jy01(k * r).h0().norm();
            assert!(rhs_value(0.0, abs_v, 1.0, k, r).abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_matches_linear_form() {
        let k = 7.3;
        let z = [0.2, 1.9];
        let x = [0.1, 1.8 + 0.05];
        let r = hypot(x[0] - z[0], x[1] - z[1]);
        let u = Complex64::new(0.013, -0.021);
        for c in [0.5, 1.0, 3.0] {
            let psi = point_source_field(z, k, &[x], c).unwrap()[0];
            let f = rhs_value(u.norm(), (u + psi).norm(), c, k, r);
            let p = jy01(k * r);
            assert!((f - (p.y0 * u.re - p.j0 * u.im)).abs() < 1e-10);
        }
    }

    #[test]
    fn round_trip_on_point_source_data() {
        let cfg = SceneConfig::default();
        let set = cfg.wavenumbers().unwrap();
        for (idx, w) in set.iter().enumerate().step_by(7) {
            let radius = cfg.radius_for(w);
            let angles = cfg.measurement_angles();
            let points = circle_points(radius, &angles);
            let a = point_source_field([0.12, -0.2], w.k, &points, 1.0).unwrap();
            let b = point_source_field([-0.25, 0.1], w.k, &points, -0.6).unwrap();
            let values: Vec<Complex64> = a.iter().zip(&b).map(|(a, b)| a + b).collect();
            let u = ComplexFieldOnCircle { k: w.k, radius, angles, values };
            let rec = measure_field(&u, &cfg, w, idx, 0.0, 0).unwrap();
            let got = retrieve_all(&rec, &cfg, w).unwrap();
            assert!(got.bound_holds());
            for j in 1..=cfg.m {
                let idx = got.sector_indices(j);
                let scale = idx.iter().map(|&i| u.values[i].norm()).fold(0.0, f64::max);
                let err = idx.iter().map(|&i| (got.values[i] - u.values[i]).norm()).fold(0.0, f64::max);
                assert!(err < 1e-12 * scale, "k = {}, j = {j}: {}", w.k, err / scale);
            }
        }
    }

    #[test]
    fn rhs_f_reads_the_record() {
        let cfg = SceneConfig::default();
        let w = *cfg.wavenumbers().unwrap().star();
        let radius = cfg.radius_for(&w);
        let angles = cfg.measurement_angles();
        let points = circle_points(radius, &angles);
        let values = point_source_field([0.0, 0.1], w.k, &points, 1.0).unwrap();
        let u = ComplexFieldOnCircle { k: w.k, radius, angles, values };
        let rec = measure_field(&u, &cfg, &w, 0, 0.0, 0).unwrap();
        let i = 57;
        let j = rec.sector[i];
        let z = cfg.layout_for(&w).point(j, 2);
        let r = hypot(points[i][0] - z[0], points[i][1] - z[1]);
        let p = jy01(w.k * r);
        let f = rhs_f(&rec, &cfg, &w, 2, i).unwrap();
        assert!((f - (p.y0 * u.values[i].re - p.j0 * u.values[i].im)).abs() < 1e-12);
    }

    #[test]
    fn determinant_bound_on_fine_arcs() {
        let cfg = SceneConfig::default();
        let set = cfg.wavenumbers().unwrap();
        for w in set.iter().step_by(5) {
            for j in [1, 4, 10] {
                assert!(sector_det_minimum(&cfg, w, j, 200) >= det_bound(&cfg, w), "k = {}", w.k);
            }
        }
    }
}
