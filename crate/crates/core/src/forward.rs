//! Synthetic data: radiated fields, reference point-source fields, scaling
//! factors and the multiplicative phaseless noise model.
//!
//! The radiated field is `u(x) = -int_{V0} (i/4) H0(k|x - y|) S(y) dy`,
//! discretised by the midpoint rule on an `n x n` cell grid over `V0`. The
//! grid is doubled until two successive levels agree to 0.1% in relative
//! `l2` norm over the targets.
//!
//! Since every target lies outside the circle enclosing the source box, the
//! kernel is expanded with Graf's addition theorem,
//!
//! ```text
//! H0(k|x - y|) = sum_n H_n(k|x|) J_n(k|y|) e^{i n (theta_x - theta_y)},   |x| > |y|,
//! ```
//!
//! which evaluates exactly the same quadrature sum at a cost of one Bessel
//! sweep per cell instead of one Hankel evaluation per (cell, target) pair.
//! [`radiate_direct`] performs the plain double loop.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use libm::{atan2, hypot};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::scene::{circle_points, ReferenceSourceLayout, SceneConfig, Wavenumber};
use crate::specfun::{bessel_j_orders, hankel_h1_orders, jy01};
use crate::{Error, Point, Result};

const MINUS_I_QUARTER: Complex64 = Complex64::new(0.0, -0.25);

/// Anything that can be sampled on `V0`.
pub trait Source {
    fn value(&self, x: Point) -> f64;
}

impl<F: Fn(Point) -> f64> Source for F {
    fn value(&self, x: Point) -> f64 {
        self(x)
    }
}

/// Cell-centred samples of a real source on `V0 = (-a, a)^2`.
///
/// `values[row * n + col]` is the value at `x1 = center(col)`,
/// `x2 = center(row)` with `center(i) = -a + (i + 1/2) 2a/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceGrid {
    pub a: f64,
    pub n: usize,
    pub values: Vec<f64>,
}

impl SourceGrid {
    pub fn new(a: f64, n: usize, values: Vec<f64>) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || n == 0 {
            return Err(Error::Config("grid needs a > 0 and n >= 1"));
        }
        if values.len() != n * n {
            return Err(Error::LengthMismatch(values.len(), n * n));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("source samples must be finite"));
        }
        Ok(Self { a, n, values })
    }

    pub fn sample<S: Source + ?Sized>(source: &S, a: f64, n: usize) -> Self {
        let h = 2.0 * a / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for row in 0..n {
            let x2 = -a + (row as f64 + 0.5) * h;
            for col in 0..n {
                let x1 = -a + (col as f64 + 0.5) * h;
                values.push(source.value([x1, x2]));
            }
        }
        Self { a, n, values }
    }

    pub fn zeros(a: f64, n: usize) -> Self {
        Self {
            a,
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.a / self.n as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        -self.a + (i as f64 + 0.5) * self.spacing()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }

    /// Largest distance from the origin of any cell centre.
    pub fn max_radius(&self) -> f64 {
        let c = self.center(self.n - 1);
        SQRT_2 * c.abs()
    }

    /// Root-mean-square magnitude, the discrete `L2(V0)` norm up to `2a`.
    pub fn rms(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v * v).sum();
        libm::sqrt(sum / self.values.len() as f64)
    }
}

/// Piecewise-constant extension of the cell samples; zero outside `V0`.
impl Source for SourceGrid {
    fn value(&self, x: Point) -> f64 {
        let h = self.spacing();
        let fc = (x[0] + self.a) / h;
        let fr = (x[1] + self.a) / h;
        if !(0.0..self.n as f64).contains(&fc) || !(0.0..self.n as f64).contains(&fr) {
            return 0.0;
        }
        self.get(fr as usize, fc as usize)
    }
}

/// Complex field samples on a circle of given radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFieldOnCircle {
    pub k: f64,
    pub radius: f64,
    pub angles: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl ComplexFieldOnCircle {
    pub fn points(&self) -> Vec<Point> {
        circle_points(self.radius, &self.angles)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_targets(targets: &[Point], limit: f64) -> Result<()> {
    for x in targets {
        let r = hypot(x[0], x[1]);
        if !(r > limit) {
            return Err(Error::Geometry { radius: r, limit });
        }
    }
    Ok(())
}

/// Midpoint-rule field of a fixed grid, summed cell by cell.
pub fn radiate_direct(grid: &SourceGrid, k: f64, targets: &[Point]) -> Result<Vec<Complex64>> {
    check_targets(targets, SQRT_2 * grid.a)?;
    let weight = grid.spacing() * grid.spacing();
    let mut out = vec![Complex64::new(0.0, 0.0); targets.len()];
    for row in 0..grid.n {
        let y2 = grid.center(row);
        for col in 0..grid.n {
            let s = grid.get(row, col);
            if s == 0.0 {
                continue;
            }
            let y1 = grid.center(col);
            for (acc, x) in out.iter_mut().zip(targets) {
                let pair = jy01(k * hypot(x[0] - y1, x[1] - y2));
                *acc += pair.h0() * s;
            }
        }
    }
    Ok(out.into_iter().map(|v| MINUS_I_QUARTER * v * weight).collect())
}

/// Circular-harmonic moments `c_n = h^2 sum_y S(y) J_n(k|y|) e^{-i n theta_y}`
/// for `n = -n_max..=n_max`, stored at index `n + n_max`.
///
/// On an even grid the cells `(+-y1, +-y2)` share one radius and are folded
/// together, so each Bessel sweep serves four cells.
fn source_moments(grid: &SourceGrid, k: f64, n_max: usize) -> Result<Vec<Complex64>> {
    let weight = grid.spacing() * grid.spacing();
    let mut moments = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
    let n = grid.n;
    let (half, folded) = if n % 2 == 0 { (n / 2, true) } else { (n, false) };
    for row in (n - half)..n {
        let y2 = grid.center(row);
        for col in (n - half)..n {
            let y1 = grid.center(col);
            // S(y1, y2), S(-y1, -y2), S(y1, -y2), S(-y1, y2)
            let (a, b, c, d) = if folded {
                let (mr, mc) = (n - 1 - row, n - 1 - col);
                (grid.get(row, col), grid.get(mr, mc), grid.get(mr, col), grid.get(row, mc))
            } else {
                (grid.get(row, col), 0.0, 0.0, 0.0)
            };
            if a == 0.0 && b == 0.0 && c == 0.0 && d == 0.0 {
                continue;
            }
            let r = hypot(y1, y2);
            let j = if r > 0.0 {
                bessel_j_orders(n_max, k * r)?
            } else {
                let mut j = vec![0.0; n_max + 1];
                j[0] = 1.0;
                j
            };
            // e^{-i n (pi - theta)} = (-1)^n e^{i n theta}, e^{-i n (pi + theta)} = (-1)^n e^{-i n theta}
            let theta = atan2(y2, y1);
            let step = Complex64::from_polar(1.0, -theta);
            let mut rot = Complex64::new(1.0, 0.0);
            moments[n_max] += (a + b + c + d) * j[0];
            let (p_even, q_even, p_odd, q_odd) = (a + b, c + d, a - b, c - d);
            for (m, &jm) in j.iter().enumerate().skip(1) {
                rot *= step;
                let (p, q, sign) = if m % 2 == 0 {
                    (p_even, q_even, 1.0)
                } else {
                    (p_odd, q_odd, -1.0)
                };
                // sum_y S(y) e^{-i m theta_y} = p e^{-i m theta} + q e^{i m theta}
                let z1 = rot * p;
                let z2 = rot * q;
                moments[n_max + m] += (z1 + z2.conj()) * jm;
                // J_{-m} = (-1)^m J_m
                moments[n_max - m] += (z1.conj() + z2) * (sign * jm);
            }
        }
    }
    for m in moments.iter_mut() {
        *m *= weight;
    }
    Ok(moments)
}

/// Smallest order past which `|J_n(k r_src) H_n(k r_x)|` stays below
/// `1e-17` of its largest value.
fn addition_order(k: f64, r_src: f64, r_target: f64) -> Result<usize> {
    let t_src = k * r_src;
    let cap = (t_src + 40.0 * libm::cbrt(t_src.max(1.0)) + 60.0) as usize;
    let j = bessel_j_orders(cap, t_src)?;
    let mut h = match hankel_h1_orders(cap, k * r_target) {
        Ok(h) => h,
        Err(Error::Overflow { order, .. }) => hankel_h1_orders(order - 1, k * r_target)?,
        Err(e) => return Err(e),
    };
    h.truncate(cap + 1);
    let products: Vec<f64> = h.iter().zip(&j).map(|(h, j)| h.norm() * j.abs()).collect();
    let peak = products.iter().cloned().fold(0.0, f64::max);
    let start = t_src as usize;
    for n in start..products.len() {
        if products[n] <= 1e-17 * peak {
            return Ok(n);
        }
    }
    Ok(products.len() - 1)
}

/// Midpoint-rule field of a fixed grid at the targets.
pub fn radiate_grid(grid: &SourceGrid, k: f64, targets: &[Point]) -> Result<Vec<Complex64>> {
    check_targets(targets, SQRT_2 * grid.a)?;
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let r_src = grid.max_radius();
    let radii: Vec<f64> = targets.iter().map(|x| hypot(x[0], x[1])).collect();
    let r_min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    // The expansion converges like (r_src / r_min)^n; near-grazing targets
    // go through the plain sum instead.
    if r_min < 1.25 * r_src {
        return radiate_direct(grid, k, targets);
    }
    let n_max = addition_order(k, r_src, r_min)?;
    let moments = source_moments(grid, k, n_max)?;

    let mut out = Vec::with_capacity(targets.len());
    let mut cache: Option<(f64, Vec<Complex64>)> = None;
    for (x, &r) in targets.iter().zip(&radii) {
        let hankels = match &cache {
            Some((rc, h)) if *rc == r => h,
            _ => {
                cache = Some((r, hankel_h1_orders(n_max, k * r)?));
                &cache.as_ref().unwrap().1
            }
        };
        let theta = atan2(x[1], x[0]);
        let step = Complex64::from_polar(1.0, theta);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut acc = hankels[0] * moments[n_max];
        for n in 1..=n_max {
            rot *= step;
            // H_{-n} = (-1)^n H_n
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += hankels[n] * (moments[n_max + n] * rot + moments[n_max - n] * rot.conj() * sign);
        }
        out.push(MINUS_I_QUARTER * acc);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Cells per side on the first level.
    pub n_start: usize,
    /// Stop once successive levels differ by less than this in relative `l2`.
    pub tolerance: f64,
    /// Give up refining past this many cells per side.
    pub n_limit: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            n_start: 256,
            tolerance: 1e-3,
            n_limit: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiatedField {
    pub values: Vec<Complex64>,
    /// Cells per side on the accepted (finest) level.
    pub n_src: usize,
    /// Relative `l2` change between the last two levels.
    pub change: f64,
}

/// Radiated field of `source` at `targets` with successive grid refinement.
///
/// Returns the finest level evaluated. When `n_limit` is reached before the
/// tolerance is met, the last level is returned and `change` reports the
/// shortfall.
pub fn radiate<S: Source + ?Sized>(
    source: &S,
    a: f64,
    k: f64,
    targets: &[Point],
    opts: &QuadratureOptions,
) -> Result<RadiatedField> {
    check_targets(targets, SQRT_2 * a)?;
    let mut n = opts.n_start.max(1);
    let first = SourceGrid::sample(source, a, n);
    if first.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("source samples must be finite"));
    }
    let mut previous = radiate_grid(&first, k, targets)?;
    loop {
        if 2 * n > opts.n_limit {
            return Ok(RadiatedField {
                values: previous,
                n_src: n,
                change: f64::INFINITY,
            });
        }
        n *= 2;
        let grid = SourceGrid::sample(source, a, n);
        let current = radiate_grid(&grid, k, targets)?;
        let change = relative_change(&previous, &current);
        if change < opts.tolerance {
            return Ok(RadiatedField {
                values: current,
                n_src: n,
                change,
            });
        }
        previous = current;
    }
}

fn relative_change(old: &[Complex64], new: &[Complex64]) -> f64 {
    let num: f64 = old.iter().zip(new).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = new.iter().map(|b| b.norm_sqr()).sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        libm::sqrt(num / den)
    }
}

/// `Psi(x) = -c (i/4) H0(k |x - z|)`.
pub fn point_source_field(z: Point, k: f64, targets: &[Point], amplitude: f64) -> Result<Vec<Complex64>> {
    targets
        .iter()
        .map(|x| {
            let r = hypot(x[0] - z[0], x[1] - z[1]);
            if r == 0.0 {
                return Err(Error::Singularity);
            }
            Ok(MINUS_I_QUARTER * jy01(k * r).h0() * amplitude)
        })
        .collect()
}

/// `|Phi_k(x, z)| = |H0(k|x - z|)| / 4`.
pub fn fundamental_modulus(z: Point, k: f64, x: Point) -> Result<f64> {
    let r = hypot(x[0] - z[0], x[1] - z[1]);
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(0.25 * jy01(k * r).h0().norm())
}

/// `c_{j,l} = max_{Gamma_j} |u| / max_{Gamma_j} |Phi_k(., z_{j,l})|` for every sector.
pub fn scaling_factors(
    abs_u: &[f64],
    points: &[Point],
    partition: &[Vec<usize>],
    layout: &ReferenceSourceLayout,
) -> Result<Vec<[f64; 2]>> {
    if abs_u.len() != points.len() {
        return Err(Error::LengthMismatch(abs_u.len(), points.len()));
    }
    partition
        .iter()
        .enumerate()
        .map(|(j, idx)| {
            if idx.is_empty() {
                return Err(Error::Data("sector without measurement points"));
            }
            let u_max = idx.iter().map(|&i| abs_u[i]).fold(0.0, f64::max);
            if !(u_max > 0.0) {
                return Err(Error::DegenerateAmplitude {
                    sector: j + 1,
                    k: layout.k,
                });
            }
            let mut out = [0.0; 2];
            for (l, c) in out.iter_mut().enumerate() {
                let z = layout.points[j][l];
                let mut phi_max: f64 = 0.0;
                for &i in idx {
                    phi_max = phi_max.max(fundamental_modulus(z, layout.k, points[i])?);
                }
                *c = u_max / phi_max;
            }
            Ok(out)
        })
        .collect()
}

/// Deterministic uniform draws on `[-1, 1)` from one sub-stream of a seed.
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Sub-stream for measurement `l` (0 for `|u|`, 1 and 2 for the
    /// reference data) on sector `j` at the `k_index`-th wavenumber.
    pub fn for_measurement(seed: u64, k_index: usize, sector: usize, l: usize) -> Self {
        Self::new(seed, ((k_index as u64) << 32) | ((sector as u64) << 8) | l as u64)
    }

    pub fn next_symmetric(&mut self) -> f64 {
        let unit = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        2.0 * unit - 1.0
    }

    /// `(1 + eps r) |m|` for each sample.
    pub fn perturb(&mut self, modulus: &[f64], epsilon: f64) -> Result<Vec<f64>> {
        check_noise_level(epsilon)?;
        Ok(modulus
            .iter()
            .map(|&m| {
                let r = self.next_symmetric();
                (1.0 + epsilon * r) * m
            })
            .collect())
    }
}

fn check_noise_level(epsilon: f64) -> Result<()> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::Config("noise level must lie in [0, 1)"))
    }
}

/// Multiplicative uniform noise `(1 + eps r)|m|`, `r ~ U[-1, 1]`, on stream 0 of `seed`.
pub fn add_phaseless_noise(modulus: &[f64], epsilon: f64, seed: u64) -> Result<Vec<f64>> {
    NoiseStream::new(seed, 0).perturb(modulus, epsilon)
}

/// Everything measured at one wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaselessRecord {
    pub k: f64,
    pub radius: f64,
    pub angles: Vec<f64>,
    /// Sector (1-based) of each angle.
    pub sector: Vec<usize>,
    /// `|u^eps|` on the whole circle.
    pub abs_u: Vec<f64>,
    /// `|v_{j,1}^eps|` and `|v_{j,2}^eps|`, each indexed like `angles` with
    /// `j` the sector of that angle.
    pub abs_v: [Vec<f64>; 2],
    /// Scaling factors `c^eps_{j,1}`, `c^eps_{j,2}` per sector.
    pub scaling: Vec<[f64; 2]>,
}

impl PhaselessRecord {
    pub fn partition(&self, m: usize) -> Vec<Vec<usize>> {
        let mut parts = vec![Vec::new(); m];
        for (i, &j) in self.sector.iter().enumerate() {
            parts[j - 1].push(i);
        }
        parts
    }
}

/// Phaseless data for a known complex field `u` on the measurement circle.
///
/// The scaling factors are computed from the noisy `|u^eps|`, the reference
/// sources are injected with those amplitudes, and independent noise is then
/// applied to each `|v_{j,l}|`.
pub fn measure_field(
    u: &ComplexFieldOnCircle,
    cfg: &SceneConfig,
    w: &Wavenumber,
    k_index: usize,
    epsilon: f64,
    seed: u64,
) -> Result<PhaselessRecord> {
    check_noise_level(epsilon)?;
    let layout = cfg.layout_for(w);
    if (u.radius - layout.radius).abs() > 1e-12 * layout.radius {
        return Err(Error::Data("field radius differs from the measurement radius"));
    }
    let points = u.points();
    let partition = cfg.sector_partition();
    if partition.iter().map(Vec::len).sum::<usize>() != u.len() {
        return Err(Error::LengthMismatch(u.len(), cfg.n_boundary));
    }
    let exact_abs: Vec<f64> = u.values.iter().map(|v| v.norm()).collect();
    let abs_u = NoiseStream::for_measurement(seed, k_index, 0, 0).perturb(&exact_abs, epsilon)?;
    let scaling = scaling_factors(&abs_u, &points, &partition, &layout)?;

    let mut sector = vec![0; u.len()];
    let mut abs_v = [vec![0.0; u.len()], vec![0.0; u.len()]];
    for (j, idx) in partition.iter().enumerate() {
        for &i in idx {
            sector[i] = j + 1;
        }
        let sector_points: Vec<Point> = idx.iter().map(|&i| points[i]).collect();
        for l in 0..2 {
            let psi = point_source_field(layout.points[j][l], w.k, &sector_points, scaling[j][l])?;
            let exact: Vec<f64> = idx
                .iter()
                .zip(&psi)
                .map(|(&i, p)| (u.values[i] + p).norm())
                .collect();
            let noisy = NoiseStream::for_measurement(seed, k_index, j + 1, l + 1).perturb(&exact, epsilon)?;
            for (&i, v) in idx.iter().zip(noisy) {
                abs_v[l][i] = v;
            }
        }
    }
    Ok(PhaselessRecord {
        k: w.k,
        radius: layout.radius,
        angles: u.angles.clone(),
        sector,
        abs_u,
        abs_v,
        scaling,
    })
}

/// Exact field of `source` on the measurement circle of `w`.
pub fn simulate_field<S: Source + ?Sized>(
    source: &S,
    cfg: &SceneConfig,
    w: &Wavenumber,
    opts: &QuadratureOptions,
) -> Result<(ComplexFieldOnCircle, RadiatedField)> {
    let radius = cfg.radius_for(w);
    let angles = cfg.measurement_angles();
    let points = circle_points(radius, &angles);
    let radiated = radiate(source, cfg.a, w.k, &points, opts)?;
    let field = ComplexFieldOnCircle {
        k: w.k,
        radius,
        angles,
        values: radiated.values.clone(),
    };
    Ok((field, radiated))
}

/// Radiate `source` and record its phaseless data at wavenumber `k`.
pub fn measure_scene<S: Source + ?Sized>(
    source: &S,
    cfg: &SceneConfig,
    k: f64,
    epsilon: f64,
    seed: u64,
) -> Result<PhaselessRecord> {
    let set = cfg.wavenumbers()?;
    let k_index = set.index_of(k).ok_or(Error::NotAdmissible(k))?;
    let w = set.as_slice()[k_index];
    let (field, _) = simulate_field(source, cfg, &w, &QuadratureOptions::default())?;
    measure_field(&field, cfg, &w, k_index, epsilon, seed)
}
