use core::f64::consts::TAU;

use num_complex::Complex64;
use phaseless_core::forward::NoiseStream;
use phaseless_core::fourier::{evaluate_model, FourierModel};
use phaseless_core::metrics::relative_errors;
use phaseless_core::retrieval::{solve_point, RetrievalMatrixSample};
use phaseless_core::scene::sector_of;
use phaseless_core::specfun::{
    alpha_remainder_bound, bessel_j0y0, beta_remainder_bound, hankel0_asymptotic_gap, hankel0_gap_bound,
    series_remainders,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn sector_contains_its_angle(theta in 0.0..TAU, m in 10usize..40) {
        let j = sector_of(theta, m);
        prop_assert!((1..=m).contains(&j));
        let width = TAU / m as f64;
        prop_assert!(theta >= (j - 1) as f64 * width - 1e-9);
        prop_assert!(theta <= j as f64 * width + 1e-9);
    }

    #[test]
    fn noise_stays_in_band(seed in any::<u64>(), eps in 0.0..0.5f64, m in proptest::collection::vec(0.0..1e3f64, 1..64)) {
        let noisy = NoiseStream::new(seed, 3).perturb(&m, eps).unwrap();
        for (a, b) in m.iter().zip(&noisy) {
            prop_assert!((a - b).abs() <= eps * a * (1.0 + 1e-15));
        }
    }

    #[test]
    fn uniform_scaling_error(delta in -0.5..0.5f64, re in proptest::collection::vec(-5.0..5.0f64, 2..40)) {
        let exact: Vec<Complex64> = re.iter().enumerate().map(|(i, r)| Complex64::new(*r, 1.0 + i as f64)).collect();
        let approx: Vec<Complex64> = exact.iter().map(|u| u * (1.0 + delta)).collect();
        let (l2, linf) = relative_errors(&exact, &approx).unwrap();
        prop_assert!((l2 - delta.abs()).abs() < 1e-12);
        prop_assert!((linf - delta.abs()).abs() < 1e-12);
    }

    #[test]
    fn retrieval_inverts_the_forward_map(
        k in 0.3..150.0f64,
        r1 in 0.5..3.0f64,
        r2 in 0.5..3.0f64,
        re in -1.0..1.0f64,
        im in -1.0..1.0f64,
    ) {
        let p1 = bessel_j0y0(k * r1).unwrap();
        let p2 = bessel_j0y0(k * r2).unwrap();
        let a = [[p1.y0, -p1.j0], [p2.y0, -p2.j0]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        prop_assume!(det.abs() > 1e-6);
        let f = [a[0][0] * re + a[0][1] * im, a[1][0] * re + a[1][1] * im];
        let sample = RetrievalMatrixSample { k, r: [r1, r2], a, f };
        let u = solve_point(&sample).unwrap();
        let scale = 1.0 / det.abs();
        prop_assert!((u - Complex64::new(re, im)).norm() < 1e-13 * scale.max(1.0));
    }

    #[test]
    fn wronskian_identity(t in 1e-3..1e3f64) {
        let p = bessel_j0y0(t).unwrap();
        let w = 2.0 / (core::f64::consts::PI * t);
        prop_assert!((p.wronskian() - w).abs() <= 1e-12 * w.max(p.h0().norm() * p.h1().norm()));
    }

    #[test]
    fn asymptotic_gap_is_bounded(log_t in (0.05f64).ln()..(1e3f64).ln()) {
        let t = log_t.exp();
        prop_assert!(hankel0_asymptotic_gap(t).unwrap() <= hankel0_gap_bound(t));
    }

    #[test]
    fn series_remainders_are_bounded(t in 1e-6..2.0f64) {
        let (alpha, beta) = series_remainders(t).unwrap();
        prop_assert!(alpha.abs() <= alpha_remainder_bound(t));
        prop_assert!(beta <= beta_remainder_bound(t));
    }

    #[test]
    fn conjugate_symmetric_models_are_real(coeffs in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 25)) {
        let mut model = FourierModel::zeros(0.3, 2);
        let mut it = coeffs.iter();
        for l1 in -2..=2i32 {
            for l2 in -2..=2i32 {
                let (re, im) = *it.next().unwrap();
                if (l1, l2) > (0, 0) {
                    model.set([l1, l2], Complex64::new(re, im)).unwrap();
                    model.set([-l1, -l2], Complex64::new(re, -im)).unwrap();
                } else if (l1, l2) == (0, 0) {
                    model.set([0, 0], Complex64::new(re, 0.0)).unwrap();
                }
            }
        }
        prop_assert!(evaluate_model(&model, 16).max_imaginary() < 1e-12);
    }
}
