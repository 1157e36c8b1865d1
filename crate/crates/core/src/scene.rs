//! Measurement geometry: the source box, the measurement circle and its
//! sectors, the reference point layout and the admissible wavenumbers.
//!
//! The rule tying these together is
//!
//! ```text
//! m >= 10,  tau >= 6,  lambda_1 = 1/2,  k* = pi lambda / a  (lambda = 1/30)
//! k != k*:  R = tau a,  lambda_2 = 1/2 + pi / (2 k R)
//! k == k*:  R = 6 a,    lambda_2 = -3/2
//! ```
//!
//! Sector `j` (1-based) spans angles `[2(j-1) pi/m, 2j pi/m]`; its two
//! reference points sit on the ray through the sector mid-angle
//! `(2j-1) pi/m` at distances `lambda_{j,l} R` from the origin.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2, TAU};

use libm::{ceil, cos, round, sin, sqrt};

use crate::{Error, Point, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    /// Half side of the source box `V0 = (-a, a)^2`.
    pub a: f64,
    /// Ratio of the measurement radius to `a` for the lattice wavenumbers.
    pub tau: f64,
    /// Number of sectors.
    pub m: usize,
    /// Fourier truncation order `N`.
    pub n_trunc: usize,
    /// Radius of the auxiliary circle on which Fourier coefficients are integrated.
    pub rho: f64,
    /// Measurement points on each full circle.
    pub n_boundary: usize,
    /// Dimensionless constant fixing `k* = pi lambda / a`.
    pub lambda_star: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            a: 0.3,
            tau: 6.0,
            m: 10,
            n_trunc: 10,
            rho: 1.4,
            n_boundary: 400,
            lambda_star: 1.0 / 30.0,
        }
    }
}

/// Which part of the admissible set a wavenumber comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WaveKind {
    /// The small wavenumber `k*` used for the zeroth coefficient.
    Star,
    /// `(pi/a) |l|` for lattice vectors with `|l|^2 = norm_sq`.
    Lattice { norm_sq: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber {
    pub k: f64,
    pub kind: WaveKind,
}

impl Wavenumber {
    pub fn is_star(&self) -> bool {
        self.kind == WaveKind::Star
    }
}

/// Sorted admissible wavenumbers; `k*` is always the first entry.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveNumberSet {
    values: Vec<Wavenumber>,
}

impl WaveNumberSet {
    pub fn k_star(&self) -> f64 {
        self.values[0].k
    }

    pub fn star(&self) -> &Wavenumber {
        &self.values[0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Wavenumber> + '_ {
        self.values.iter()
    }

    pub fn as_slice(&self) -> &[Wavenumber] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entry matching `k` to a relative tolerance of `1e-10`.
    pub fn find(&self, k: f64) -> Option<&Wavenumber> {
        self.values
            .iter()
            .find(|w| (w.k - k).abs() <= 1e-10 * w.k.max(k.abs()))
    }

    /// Entry for the lattice shell `|l|^2 = norm_sq`.
    pub fn lattice(&self, norm_sq: u32) -> Option<&Wavenumber> {
        self.values
            .iter()
            .find(|w| w.kind == WaveKind::Lattice { norm_sq })
    }

    /// Position of `k` in the sorted set.
    pub fn index_of(&self, k: f64) -> Option<usize> {
        self.values
            .iter()
            .position(|w| (w.k - k).abs() <= 1e-10 * w.k.max(k.abs()))
    }
}

/// `{(pi/a)|l| : 1 <= |l|_inf <= N} U {pi lambda / a}` with `lambda = 1/30`.
pub fn build_wavenumbers(a: f64, n_trunc: usize) -> Result<WaveNumberSet> {
    build_wavenumbers_with(a, n_trunc, 1.0 / 30.0)
}

pub fn build_wavenumbers_with(a: f64, n_trunc: usize, lambda_star: f64) -> Result<WaveNumberSet> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Config("a must be positive"));
    }
    if n_trunc == 0 {
        return Err(Error::Config("the truncation order N must be at least 1"));
    }
    if !(lambda_star > 0.0 && lambda_star < 1.0) {
        return Err(Error::Config("lambda_star must lie in (0, 1)"));
    }
    let n = n_trunc as u32;
    let mut shells: Vec<u32> = Vec::new();
    for l1 in 0..=n {
        for l2 in 0..=l1 {
            if l1 > 0 {
                shells.push(l1 * l1 + l2 * l2);
            }
        }
    }
    shells.sort_unstable();
    shells.dedup();
    let base = PI / a;
    let mut values = Vec::with_capacity(shells.len() + 1);
    values.push(Wavenumber {
        k: base * lambda_star,
        kind: WaveKind::Star,
    });
    values.extend(shells.into_iter().map(|norm_sq| Wavenumber {
        k: base * sqrt(norm_sq as f64),
        kind: WaveKind::Lattice { norm_sq },
    }));
    Ok(WaveNumberSet { values })
}

/// Lattice vectors `l` with `1 <= |l|_inf <= N`, row-major in `(l1, l2)`.
pub fn lattice_vectors(n_trunc: usize) -> Vec<[i32; 2]> {
    let n = n_trunc as i32;
    let mut out = Vec::new();
    for l1 in -n..=n {
        for l2 in -n..=n {
            if l1 != 0 || l2 != 0 {
                out.push([l1, l2]);
            }
        }
    }
    out
}

/// Reference points `z_{j,1}`, `z_{j,2}` of every sector at one wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSourceLayout {
    pub k: f64,
    /// Measurement radius `R(k)`.
    pub radius: f64,
    /// `lambda_{j,1}` and `lambda_{j,2}` (the same for every sector).
    pub lambdas: [f64; 2],
    /// `points[j - 1] = [z_{j,1}, z_{j,2}]`.
    pub points: Vec<[Point; 2]>,
}

impl ReferenceSourceLayout {
    pub fn point(&self, sector: usize, which: usize) -> Point {
        self.points[sector - 1][which - 1]
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::Config("a must be positive"));
        }
        if !(self.tau >= 6.0 && self.tau.is_finite()) {
            return Err(Error::Config("tau must be at least 6"));
        }
        if self.m < 10 {
            return Err(Error::Config("the sector count m must be at least 10"));
        }
        if self.n_trunc == 0 {
            return Err(Error::Config("the truncation order N must be at least 1"));
        }
        if !(self.rho > SQRT_2 * self.a && self.rho.is_finite()) {
            return Err(Error::Config(
                "rho must exceed the circumradius sqrt(2) a of the source box",
            ));
        }
        if self.n_boundary < 2 * self.m {
            return Err(Error::Config("n_boundary must give every sector at least two points"));
        }
        if !(self.lambda_star > 0.0 && self.k_star() * self.star_radius() < 1.0) {
            return Err(Error::Config("lambda_star must satisfy 0 < k* R(k*) < 1"));
        }
        Ok(())
    }

    pub fn k_star(&self) -> f64 {
        PI * self.lambda_star / self.a
    }

    /// Measurement radius used for every lattice wavenumber.
    pub fn lattice_radius(&self) -> f64 {
        self.tau * self.a
    }

    /// Measurement radius used for `k*`.
    pub fn star_radius(&self) -> f64 {
        6.0 * self.a
    }

    pub fn radius_for(&self, w: &Wavenumber) -> f64 {
        if w.is_star() {
            self.star_radius()
        } else {
            self.lattice_radius()
        }
    }

    pub fn wavenumbers(&self) -> Result<WaveNumberSet> {
        build_wavenumbers_with(self.a, self.n_trunc, self.lambda_star)
    }

    /// The constraint `0 < lambda < a / (2 pi)`, reading `a` as a pure number.
    pub fn fourier_lambda_constraint_holds(&self) -> bool {
        self.lambda_star > 0.0 && self.lambda_star < self.a / TAU
    }

    /// Equispaced angles `2 pi n / n_boundary`.
    pub fn measurement_angles(&self) -> Vec<f64> {
        measurement_angles(self.n_boundary)
    }

    pub fn sector_of(&self, theta: f64) -> usize {
        sector_of(theta, self.m)
    }

    /// Indices into [`Self::measurement_angles`] grouped by sector.
    pub fn sector_partition(&self) -> Vec<Vec<usize>> {
        let mut parts = alloc::vec![Vec::new(); self.m];
        for (i, theta) in self.measurement_angles().into_iter().enumerate() {
            parts[self.sector_of(theta) - 1].push(i);
        }
        parts
    }

    /// Mid-angle `(2j - 1) pi / m` of sector `j`.
    pub fn sector_mid_angle(&self, sector: usize) -> f64 {
        (2 * sector - 1) as f64 * PI / self.m as f64
    }

    pub fn reference_points(&self, k: f64) -> Result<ReferenceSourceLayout> {
        let set = self.wavenumbers()?;
        let w = *set.find(k).ok_or(Error::NotAdmissible(k))?;
        Ok(self.layout_for(&w))
    }

    /// Reference layout for an entry of the admissible set.
    pub fn layout_for(&self, w: &Wavenumber) -> ReferenceSourceLayout {
        let radius = self.radius_for(w);
        let lambda2 = if w.is_star() {
            -1.5
        } else {
            0.5 + PI / (2.0 * w.k * radius)
        };
        let lambdas = [0.5, lambda2];
        let points = (1..=self.m)
            .map(|j| {
                let mid = self.sector_mid_angle(j);
                let dir = [cos(mid), sin(mid)];
                lambdas.map(|lam| [lam * radius * dir[0], lam * radius * dir[1]])
            })
            .collect();
        ReferenceSourceLayout {
            k: w.k,
            radius,
            lambdas,
            points,
        }
    }
}

pub fn measurement_angles(n_boundary: usize) -> Vec<f64> {
    (0..n_boundary)
        .map(|n| TAU * n as f64 / n_boundary as f64)
        .collect()
}

/// Points `radius (cos theta, sin theta)`.
pub fn circle_points(radius: f64, angles: &[f64]) -> Vec<Point> {
    angles
        .iter()
        .map(|&t| [radius * cos(t), radius * sin(t)])
        .collect()
}

/// Sector index `j` in `1..=m` with `2(j-1)pi/m <= theta <= 2j pi/m`.
///
/// Angles on a shared boundary go to the lower-index sector. Angles are
/// reduced modulo `2 pi` first.
pub fn sector_of(theta: f64, m: usize) -> usize {
    let mut reduced = libm::fmod(theta, TAU);
    if reduced < 0.0 {
        reduced += TAU;
    }
    let x = reduced * m as f64 / TAU;
    let nearest = round(x);
    let j = if (x - nearest).abs() < 1e-9 { nearest } else { ceil(x) };
    (j as usize).clamp(1, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: Point, q: Point) -> f64 {
        libm::hypot(p[0] - q[0], p[1] - q[1])
    }

    #[test]
    fn wavenumbers_for_first_order() {
        let a = 0.7;
        let set = build_wavenumbers(a, 1).unwrap();
        let ks: Vec<f64> = set.iter().map(|w| w.k).collect();
        assert_eq!(ks.len(), 3);
        assert!((ks[0] - PI / (30.0 * a)).abs() < 1e-15);
        assert!((ks[1] - PI / a).abs() < 1e-15);
        assert!((ks[2] - SQRT_2 * PI / a).abs() < 1e-14);
    }

    #[test]
    fn star_wavenumber_for_default_box() {
        let set = build_wavenumbers(0.3, 1).unwrap();
        assert!((set.k_star() - PI / 9.0).abs() < 1e-15);
        assert!(set.find(PI / 9.0).unwrap().is_star());
    }

    #[test]
    fn second_order_contains_sqrt5_shell() {
        let a = 0.3;
        let set = build_wavenumbers(a, 2).unwrap();
        assert!(set.find(PI / a * sqrt(5.0)).is_some());
        // shells 1, 2, 4, 5, 8 plus k*
        assert_eq!(set.len(), 6);
    }

    #[test]
    fn shells_match_enumeration() {
        // brute-force oracle over the square of lattice vectors
        for n in 1..=10usize {
            let mut norms: Vec<i64> = Vec::new();
            let ni = n as i64;
            for l1 in -ni..=ni {
                for l2 in -ni..=ni {
                    if l1 != 0 || l2 != 0 {
                        norms.push(l1 * l1 + l2 * l2);
                    }
                }
            }
            norms.sort_unstable();
            norms.dedup();
            let set = build_wavenumbers(0.3, n).unwrap();
            assert_eq!(set.len(), norms.len() + 1);
            let ks: Vec<f64> = set.iter().map(|w| w.k).collect();
            assert!(ks.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn rejects_zero_order() {
        assert!(matches!(build_wavenumbers(0.3, 0), Err(Error::Config(_))));
    }

    #[test]
    fn sector_assignment() {
        assert_eq!(sector_of(0.1 * PI, 10), 1);
        assert_eq!(sector_of(0.0, 10), 1);
        assert_eq!(sector_of(0.2 * PI, 10), 1);
        assert_eq!(sector_of(0.2 * PI + 1e-6, 10), 2);
        assert_eq!(sector_of(TAU - 1e-9, 10), 10);
    }

    #[test]
    fn partition_covers_every_angle_once() {
        let cfg = SceneConfig::default();
        let parts = cfg.sector_partition();
        let total: usize = parts.iter().map(Vec::len).sum();
        assert_eq!(total, cfg.n_boundary);
        let width = TAU / cfg.m as f64;
        let angles = cfg.measurement_angles();
        for (j, idx) in parts.iter().enumerate() {
            for &i in idx {
                let lo = width * j as f64;
                assert!(angles[i] >= lo - 1e-12 && angles[i] <= lo + width + 1e-12);
            }
        }
    }

    #[test]
    fn second_reference_ratio() {
        let cfg = SceneConfig::default();
        let layout = cfg.reference_points(10.0 * PI / 3.0).unwrap();
        assert!((layout.lambdas[1] - (0.5 + 1.0 / 12.0)).abs() < 1e-14);
        assert_eq!(layout.lambdas[0], 0.5);
        let star = cfg.reference_points(PI / 9.0).unwrap();
        assert_eq!(star.lambdas, [0.5, -1.5]);
        let z = star.point(3, 2);
        assert!((libm::hypot(z[0], z[1]) - 1.5 * 1.8).abs() < 1e-12);
    }

    #[test]
    fn reference_points_lie_on_mid_ray() {
        let cfg = SceneConfig::default();
        for w in cfg.wavenumbers().unwrap().iter() {
            let layout = cfg.layout_for(w);
            for j in 1..=cfg.m {
                let mid = cfg.sector_mid_angle(j);
                for l in 1..=2 {
                    let z = layout.point(j, l);
                    let lam = layout.lambdas[l - 1];
                    let cross = z[0] * sin(mid) - z[1] * cos(mid);
                    let along = z[0] * cos(mid) + z[1] * sin(mid);
                    assert!(cross.abs() < 1e-12);
                    assert!(along * lam > 0.0);
                }
            }
            if !w.is_star() {
                let lam2 = layout.lambdas[1];
                assert!(lam2 > 0.5 && lam2 <= (cfg.tau + 1.0) / (2.0 * cfg.tau) + 1e-15);
                assert!(lam2 < 2.0 / 3.0);
            }
        }
    }

    #[test]
    fn non_admissible_wavenumber() {
        let cfg = SceneConfig::default();
        assert!(matches!(
            cfg.reference_points(3.0),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn distance_chain_on_grid() {
        for tau in [6.0, 7.5] {
            let cfg = SceneConfig {
                tau,
                n_boundary: 2000,
                ..SceneConfig::default()
            };
            let angles = cfg.measurement_angles();
            let parts = cfg.sector_partition();
            for w in cfg.wavenumbers().unwrap().iter() {
                let layout = cfg.layout_for(w);
                let pts = circle_points(layout.radius, &angles);
                let kr = w.k * layout.radius;
                for (j, idx) in parts.iter().enumerate() {
                    for &i in idx {
                        let t1 = w.k * dist(pts[i], layout.points[j][0]);
                        let t2 = w.k * dist(pts[i], layout.points[j][1]);
                        if w.is_star() {
                            assert!((kr - PI / 5.0).abs() < 1e-14);
                            assert!(t1 >= 0.5 * kr - 1e-12 && t1 <= 0.55 * kr);
                            assert!(t2 >= 2.47 * kr && t2 <= 2.5 * kr + 1e-12);
                        } else {
                            assert!(t1 >= tau * PI / 2.0 - 1e-9);
                            assert!(t2 > tau * PI / 3.0);
                            let diff = t1 - t2;
                            assert!((0.3363 * PI..=PI / 2.0 + 1e-12).contains(&diff));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn validation() {
        assert!(SceneConfig::default().validate().is_ok());
        assert!(SceneConfig::default().fourier_lambda_constraint_holds());
        let bad = [
            SceneConfig { m: 9, ..SceneConfig::default() },
            SceneConfig { tau: 5.0, ..SceneConfig::default() },
            SceneConfig { rho: 0.4, ..SceneConfig::default() },
            SceneConfig { n_trunc: 0, ..SceneConfig::default() },
            SceneConfig { lambda_star: 0.1, ..SceneConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }
}
