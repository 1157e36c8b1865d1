//! Bessel and Hankel functions of integer order for real positive arguments.
//!
//! `J0`, `Y0`, `J1` and `Y1` are evaluated in three bands:
//!
//! * `t <= 8`: the ascending power series (the `Y0` series carries Euler's
//!   constant explicitly),
//! * `8 < t < 25`: Miller's backward recurrence for `J_n`, normalised by
//!   `J0 + 2 sum J_2k = 1`, with `Y0` and `Y1` from their Neumann series,
//! * `t >= 25`: Hankel's asymptotic expansion, whose smallest term is below
//!   `e^{-2t}` there.
//!
//! Accuracy is about `1e-13` relative to the modulus `|H0(t)|` (the
//! oscillation envelope) over `(0, 1e3]`. Higher orders come from backward
//! recurrence for `J_n` and forward recurrence for `Y_n`.
//!
//! The module also evaluates the remainder quantities used by the stability
//! analysis of the phase retrieval step: the gap between `H0` and its leading
//! asymptotic term, and the remainders of the two-term small-argument
//! expansions of `J0` and `Y0`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{cbrt, ceil, cos, log, sin, sqrt};
use num_complex::Complex64;

use crate::{Error, Result};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;
const OVERFLOW_LIMIT: f64 = 1e300;

/// `J0`, `Y0` and their first-order companions at one argument.
///
/// `J0' = -J1` and `Y0' = -Y1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair {
    pub t: f64,
    pub j0: f64,
    pub y0: f64,
    pub j1: f64,
    pub y1: f64,
}

impl BesselPair {
    /// `H0(t) = J0(t) + i Y0(t)`.
    pub fn h0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }

    pub fn h1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }

    /// `J0 Y0' - J0' Y0`, equal to `2 / (pi t)`.
    pub fn wronskian(&self) -> f64 {
        self.j1 * self.y0 - self.j0 * self.y1
    }
}

/// `H_n^(1)(t)` together with its derivative with respect to `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelValue {
    pub order: usize,
    pub t: f64,
    pub value: Complex64,
    pub derivative: Complex64,
}

impl HankelValue {
    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }
}

fn check_positive(what: &'static str, t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: t,
            domain: "t > 0",
        })
    }
}

/// `J0(t)`, `Y0(t)`, `J1(t)`, `Y1(t)`.
pub fn bessel_j0y0(t: f64) -> Result<BesselPair> {
    check_positive("bessel_j0y0", t)?;
    Ok(jy01(t))
}

pub(crate) fn jy01(t: f64) -> BesselPair {
    if t <= SERIES_LIMIT {
        ascending_series(t)
    } else if t < ASYMPTOTIC_LIMIT {
        miller_neumann(t)
    } else {
        hankel_expansion(t)
    }
}

fn ascending_series(t: f64) -> BesselPair {
    let q = 0.25 * t * t;
    let log_term = log(0.5 * t) + EULER_GAMMA;

    // J0 = sum (-q)^p / (p!)^2, Y0 tail carries the harmonic numbers H_p.
    let mut j0 = 1.0;
    let mut y0_tail = 0.0;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    // J1 / (t/2) = sum (-q)^p / (p! (p+1)!), Y1 tail weights H_p + H_{p+1}.
    let mut j1 = 1.0;
    let mut y1_tail = 1.0;
    let mut term1 = 1.0;
    for p in 1..80 {
        let pf = p as f64;
        term *= -q / (pf * pf);
        harmonic += 1.0 / pf;
        j0 += term;
        y0_tail += harmonic * term;

        term1 *= -q / (pf * (pf + 1.0));
        j1 += term1;
        y1_tail += (2.0 * harmonic + 1.0 / (pf + 1.0)) * term1;

        if term.abs() < 1e-18 * j0.abs().max(1e-300) && term1.abs() < 1e-18 {
            break;
        }
    }
    let half = 0.5 * t;
    let j1 = half * j1;
    let y0 = 2.0 / PI * (log_term * j0 - y0_tail);
    let y1 = 2.0 / PI * log_term * j1 - 2.0 / (PI * t) - half * y1_tail / PI;
    BesselPair { t, j0, y0, j1, y1 }
}

/// Starting index for backward recurrence so that `J_start(t)` is negligible
/// against every order up to `n_max`.
fn miller_start(n_max: usize, t: f64) -> usize {
    let base = (n_max as f64).max(t);
    ceil(base + 12.0 * cbrt(base.max(1.0)) + 30.0) as usize
}

/// Unnormalised backward recurrence; returns `j[0..=keep]` up to a common factor.
fn backward_recurrence(keep: usize, start: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; keep + 1];
    let mut upper = 0.0;
    let mut current = 1e-300;
    for n in (1..=start).rev() {
        if n <= keep {
            out[n] = current;
        }
        let lower = 2.0 * n as f64 / t * current - upper;
        upper = current;
        current = lower;
        if current.abs() > 1e250 {
            current *= 1e-250;
            upper *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    out[0] = current;
    out
}

fn miller_neumann(t: f64) -> BesselPair {
    let start = miller_start(0, t);
    let j = backward_recurrence(start, start, t);
    let mut norm = j[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * j[k];
        k += 2;
    }
    let jn = |n: usize| if n <= start { j[n] / norm } else { 0.0 };

    let log_term = log(0.5 * t) + EULER_GAMMA;
    let mut y0_sum = 0.0;
    let mut y1_sum = 0.0;
    let mut k = 1;
    while 2 * k - 1 <= start {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        y0_sum += sign * jn(2 * k) / kf;
        y1_sum += sign * (jn(2 * k - 1) - jn(2 * k + 1)) / kf;
        k += 1;
    }
    let j0 = jn(0);
    let j1 = jn(1);
    let y0 = 2.0 / PI * (log_term * j0 - 2.0 * y0_sum);
    let y1 = 2.0 / PI * (-j0 / t + log_term * j1 + y1_sum);
    BesselPair { t, j0, y0, j1, y1 }
}

/// Hankel's expansion `H_nu(t) = sqrt(2/(pi t)) (P + iQ) e^{i chi}`; returns
/// `(P - 1, Q)` so that the leading term can be removed without cancellation.
fn asymptotic_pq(order: u32, t: f64) -> (f64, f64) {
    let mu = 4.0 * (order * order) as f64;
    let mut p_minus_one = 0.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut previous = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * t);
        let size = term.abs();
        if size > previous {
            break;
        }
        previous = size;
        // a_k enters with sign (-1)^{floor(k/2)}
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p_minus_one += signed;
        } else {
            q += signed;
        }
        if size < 1e-18 {
            break;
        }
    }
    (p_minus_one, q)
}

fn hankel_expansion(t: f64) -> BesselPair {
    let amp = sqrt(2.0 / (PI * t));
    let (s, c) = (sin(t), cos(t));
    // chi_0 = t - pi/4, chi_1 = t - 3pi/4, expanded so that t is never shifted.
    let (cos0, sin0) = ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2);
    let (cos1, sin1) = ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2);

    let (pm0, q0) = asymptotic_pq(0, t);
    let (pm1, q1) = asymptotic_pq(1, t);
    let (p0, p1) = (1.0 + pm0, 1.0 + pm1);
    BesselPair {
        t,
        j0: amp * (p0 * cos0 - q0 * sin0),
        y0: amp * (p0 * sin0 + q0 * cos0),
        j1: amp * (p1 * cos1 - q1 * sin1),
        y1: amp * (p1 * sin1 + q1 * cos1),
    }
}

/// `J_0(t), ..., J_{n_max}(t)`.
pub fn bessel_j_orders(n_max: usize, t: f64) -> Result<Vec<f64>> {
    check_positive("bessel_j_orders", t)?;
    let pair = jy01(t);
    if n_max == 0 {
        return Ok(vec![pair.j0]);
    }
    let start = miller_start(n_max, t);
    let mut j = backward_recurrence(n_max, start, t);
    // Normalise against whichever of J0, J1 is larger; they never vanish together.
    let scale = if pair.j0.abs() >= pair.j1.abs() {
        pair.j0 / j[0]
    } else {
        pair.j1 / j[1]
    };
    for v in j.iter_mut() {
        *v *= scale;
    }
    j[0] = pair.j0;
    j[1] = pair.j1;
    Ok(j)
}

/// `Y_0(t), ..., Y_{n_max}(t)` by forward recurrence.
///
/// Fails with [`Error::Overflow`] at the first order whose magnitude leaves
/// the representable range.
pub fn bessel_y_orders(n_max: usize, t: f64) -> Result<Vec<f64>> {
    check_positive("bessel_y_orders", t)?;
    let pair = jy01(t);
    let mut y = Vec::with_capacity(n_max + 1);
    y.push(pair.y0);
    if n_max >= 1 {
        y.push(pair.y1);
    }
    for n in 1..n_max {
        let next = 2.0 * n as f64 / t * y[n] - y[n - 1];
        if !next.is_finite() || next.abs() > OVERFLOW_LIMIT {
            return Err(Error::Overflow {
                order: n + 1,
                argument: t,
            });
        }
        y.push(next);
    }
    Ok(y)
}

/// `H_0^(1)(t), ..., H_{n_max}^(1)(t)`.
pub fn hankel_h1_orders(n_max: usize, t: f64) -> Result<Vec<Complex64>> {
    let y = bessel_y_orders(n_max, t)?;
    let j = bessel_j_orders(n_max, t)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// `H_n^(1)(t)` and `H_n^(1)'(t)`.
///
/// Negative orders follow from `H_{-n} = (-1)^n H_n` at the call site.
pub fn hankel_h1(order: usize, t: f64) -> Result<HankelValue> {
    check_positive("hankel_h1", t)?;
    let h = hankel_h1_orders(order + 1, t)?;
    let derivative = if order == 0 {
        -h[1]
    } else {
        h[order - 1] - h[order] * (order as f64 / t)
    };
    Ok(HankelValue {
        order,
        t,
        value: h[order],
        derivative,
    })
}

/// `H0^(1)(t)`, exactly `J0(t) + i Y0(t)`.
pub fn hankel_h0(t: f64) -> Result<Complex64> {
    Ok(bessel_j0y0(t)?.h0())
}

/// `|H0^(1)(t) - sqrt(2/(pi t)) e^{i(t - pi/4)}|`.
pub fn hankel0_asymptotic_gap(t: f64) -> Result<f64> {
    check_positive("hankel0_asymptotic_gap", t)?;
    if t >= ASYMPTOTIC_LIMIT {
        // |H0 - leading| = sqrt(2/(pi t)) |(P - 1) + iQ|
        let (pm1, q) = asymptotic_pq(0, t);
        return Ok(sqrt(2.0 / (PI * t)) * libm::hypot(pm1, q));
    }
    let pair = jy01(t);
    let amp = sqrt(2.0 / (PI * t));
    let phase = t - 0.25 * PI;
    Ok(libm::hypot(
        pair.j0 - amp * cos(phase),
        pair.y0 - amp * sin(phase),
    ))
}

/// Upper bound on [`hankel0_asymptotic_gap`]: `t^{-3/2} / (4 sqrt(2 pi))`.
pub fn hankel0_gap_bound(t: f64) -> f64 {
    1.0 / (t * sqrt(t) * 4.0 * sqrt(2.0 * PI))
}

/// Remainders of the two-term small-argument expansions on `0 < t < 2`:
/// `alpha = J0(t) - (1 - t^2/4)` and
/// `|beta| = |Y0(t) - (2/pi)(1 - t^2/4)(ln(t/2) + C0) - t^2/(2 pi)|`.
///
/// Both are summed from the series tails directly so that no leading terms
/// cancel.
pub fn series_remainders(t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t < 2.0) {
        return Err(Error::Domain {
            what: "series_remainders",
            value: t,
            domain: "0 < t < 2",
        });
    }
    let q = 0.25 * t * t;
    let mut term = -q; // p = 1
    let mut harmonic = 1.0;
    let mut alpha = 0.0;
    let mut weighted = 0.0;
    for p in 2..60 {
        let pf = p as f64;
        term *= -q / (pf * pf);
        harmonic += 1.0 / pf;
        alpha += term;
        weighted += harmonic * term;
        if term.abs() < 1e-30 * alpha.abs() {
            break;
        }
    }
    let beta = 2.0 / PI * (alpha * (log(0.5 * t) + EULER_GAMMA) - weighted);
    Ok((alpha, beta.abs()))
}

pub fn alpha_remainder_bound(t: f64) -> f64 {
    let t2 = t * t;
    t2 * t2 / 64.0
}

pub fn beta_remainder_bound(t: f64) -> f64 {
    let t3 = t * t * t;
    t3 / 72.0 + t3 * t / 62.0
}
