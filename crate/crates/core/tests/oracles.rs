//! Checks against oracles computed independently of the library code paths.

use num_complex::Complex64;
use phaseless_core::forward::{measure_field, point_source_field, ComplexFieldOnCircle, QuadratureOptions};
use phaseless_core::fourier::angular_spectrum;
use phaseless_core::pipeline::{reconstruct, retrieve_one, simulate_all, SimulatedField};
use phaseless_core::retrieval::{retrieve_all, stability_envelope};
use phaseless_core::scene::{circle_points, measurement_angles, SceneConfig};
use phaseless_core::sources::{BasisMode, Constant};
use phaseless_core::specfun::bessel_j0y0;

/// `J0` straight from its power series, adequate for `t < 6`.
fn j0_series(t: f64) -> f64 {
    let q = -t * t / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..60 {
        term *= q / (k * k) as f64;
        sum += term;
    }
    sum
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo).signum() == f(mid).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn first_zero_of_j0() {
    let oracle = bisect(j0_series, 2.0, 3.0);
    let ours = bisect(|t| bessel_j0y0(t).unwrap().j0, 2.0, 3.0);
    assert!((oracle - 2.404_825_557_695_773).abs() < 1e-13);
    assert!((ours - oracle).abs() < 1e-13);
}

#[test]
fn spectrum_matches_dense_quadrature() {
    let (k, radius) = (20.0, 1.8);
    let z = [-0.21, 0.17];
    let coarse = {
        let angles = measurement_angles(400);
        let values = point_source_field(z, k, &circle_points(radius, &angles), 1.0).unwrap();
        angular_spectrum(&ComplexFieldOnCircle { k, radius, angles, values }, 60).unwrap()
    };
    let dense_n = 8000;
    let dense_angles = measurement_angles(dense_n);
    let dense = point_source_field(z, k, &circle_points(radius, &dense_angles), 1.0).unwrap();
    for n in [-60i64, -31, -7, 0, 1, 12, 45, 60] {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, u) in dense_angles.iter().zip(&dense) {
            acc += u * Complex64::from_polar(1.0, -(n as f64) * t);
        }
        acc /= dense_n as f64;
        assert!((coarse.get(n) - acc).norm() < 1e-8, "n = {n}");
    }
}

#[test]
fn stability_envelope_for_point_sources() {
    let cfg = SceneConfig::default();
    let set = cfg.wavenumbers().unwrap();
    for (idx, w) in set.iter().enumerate().step_by(9) {
        let radius = cfg.radius_for(w);
        let angles = cfg.measurement_angles();
        let values = point_source_field([0.1, -0.22], w.k, &circle_points(radius, &angles), 1.0).unwrap();
        let u = ComplexFieldOnCircle { k: w.k, radius, angles, values };
        for eps in [0.001, 0.05] {
            let c = stability_envelope(eps).unwrap();
            for seed in 0..5 {
                let rec = measure_field(&u, &cfg, w, idx, eps, seed).unwrap();
                let got = retrieve_all(&rec, &cfg, w).unwrap();
                for j in 1..=cfg.m {
                    let i = got.sector_indices(j);
                    let err = i.iter().map(|&i| (got.values[i] - u.values[i]).norm()).fold(0.0, f64::max);
                    let size = i.iter().map(|&i| u.values[i].norm()).fold(0.0, f64::max);
                    assert!(err <= eps * c * size, "k = {}, j = {j}", w.k);
                }
            }
        }
    }
}

fn noiseless_model(sims: &[SimulatedField], cfg: &SceneConfig) -> phaseless_core::fourier::FourierModel {
    let fields: Vec<ComplexFieldOnCircle> = sims
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let r = retrieve_one(s, cfg, i, 0.0, 0).unwrap();
            ComplexFieldOnCircle { k: r.k, radius: r.radius, angles: r.angles, values: r.values }
        })
        .collect();
    let refs: Vec<&ComplexFieldOnCircle> = fields.iter().collect();
    reconstruct(&refs, cfg, cfg.n_trunc).unwrap().model
}

#[test]
fn constant_source_gives_constant_coefficient() {
    let cfg = SceneConfig { n_trunc: 2, ..SceneConfig::default() };
    let sims = simulate_all(&Constant(0.8), &cfg, &QuadratureOptions::default()).unwrap();
    let model = noiseless_model(&sims, &cfg);
    for (l, s) in model.entries() {
        let want = if l == [0, 0] { 0.8 } else { 0.0 };
        assert!((s - want).norm() < 1e-3, "l = {l:?}: {s}");
    }
}

#[test]
fn single_mode_source() {
    let cfg = SceneConfig { n_trunc: 1, ..SceneConfig::default() };
    let source = BasisMode { l: [1, -1], a: cfg.a };
    let sims = simulate_all(&source, &cfg, &QuadratureOptions::default()).unwrap();
    let model = noiseless_model(&sims, &cfg);
    for (l, s) in model.entries() {
        let want = if l == [1, -1] || l == [-1, 1] { 0.5 } else { 0.0 };
        assert!((s - want).norm() < 1e-3, "l = {l:?}: {s}");
    }
}
