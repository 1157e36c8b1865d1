//! Measure, retrieve and reconstruct, without IO.
//!
//! Exact fields are simulated once per wavenumber ([`simulate_all`]) and
//! reused across noise levels and seeds.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::forward::{measure_field, simulate_field, ComplexFieldOnCircle, QuadratureOptions, Source, SourceGrid};
use crate::fourier::{
    angular_spectrum, evaluate_model, fourier_coefficient, propagate, truncation_order, zeroth_coefficient, ComplexGrid,
    FourierModel,
};
use crate::metrics::{relative_errors, relative_l2_real};
use crate::retrieval::{retrieve_all, RetrievedField, SectorDiagnostics};
use crate::scene::{lattice_vectors, SceneConfig, Wavenumber};
use crate::{Error, Result};

/// Relative tolerance for truncating circular-harmonic series.
pub const SERIES_TOLERANCE: f64 = 1e-12;

/// `2 ceil(eps^{-1/3})`.
pub fn truncation_for_noise(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain {
            what: "noise level",
            value: epsilon,
            domain: "(0, 1)",
        });
    }
    // guard against cbrt(1000) landing a hair above 10
    Ok(2 * libm::ceil(libm::cbrt(1.0 / epsilon) - 1e-9) as usize)
}

/// Exact (quadrature) field at one wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedField {
    pub wavenumber: Wavenumber,
    pub field: ComplexFieldOnCircle,
    /// Cells per side of the accepted quadrature level.
    pub n_src: usize,
    pub quadrature_change: f64,
}

/// Simulate the field at every wavenumber of `cfg`.
pub fn simulate_all<S: Source + ?Sized>(
    source: &S,
    cfg: &SceneConfig,
    opts: &QuadratureOptions,
) -> Result<Vec<SimulatedField>> {
    cfg.validate()?;
    cfg.wavenumbers()?
        .iter()
        .map(|w| simulate_one(source, cfg, w, opts))
        .collect()
}

pub fn simulate_one<S: Source + ?Sized>(
    source: &S,
    cfg: &SceneConfig,
    w: &Wavenumber,
    opts: &QuadratureOptions,
) -> Result<SimulatedField> {
    let (field, radiated) = simulate_field(source, cfg, w, opts)?;
    Ok(SimulatedField {
        wavenumber: *w,
        field,
        n_src: radiated.n_src,
        quadrature_change: radiated.change,
    })
}

/// Per-sector retrieval errors at one wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalErrors {
    pub k: f64,
    /// `(l2, linf)` relative errors on each sector.
    pub sectors: Vec<(f64, f64)>,
    /// Relative errors over the whole circle.
    pub total: (f64, f64),
}

pub fn retrieval_errors(exact: &ComplexFieldOnCircle, retrieved: &RetrievedField, m: usize) -> Result<RetrievalErrors> {
    let sectors = (1..=m)
        .map(|j| {
            let idx = retrieved.sector_indices(j);
            let u: Vec<Complex64> = idx.iter().map(|&i| exact.values[i]).collect();
            let v: Vec<Complex64> = idx.iter().map(|&i| retrieved.values[i]).collect();
            relative_errors(&u, &v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RetrievalErrors {
        k: exact.k,
        sectors,
        total: relative_errors(&exact.values, &retrieved.values)?,
    })
}

/// Noisy phaseless data and the retrieved field for one simulated field.
///
/// `k_index` selects the noise sub-streams; it is the position of the
/// wavenumber in the admissible set.
pub fn retrieve_one(
    sim: &SimulatedField,
    cfg: &SceneConfig,
    k_index: usize,
    epsilon: f64,
    seed: u64,
) -> Result<RetrievedField> {
    let record = measure_field(&sim.field, cfg, &sim.wavenumber, k_index, epsilon, seed)?;
    retrieve_all(&record, cfg, &sim.wavenumber)
}

/// Fourier model from retrieved fields at (at least) the wavenumbers needed
/// for truncation `n_trunc`, plus `k*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub model: FourierModel,
    /// `(k, n_max)` series truncation used for each wavenumber.
    pub series_orders: Vec<(f64, usize)>,
}

pub fn reconstruct(fields: &[&ComplexFieldOnCircle], cfg: &SceneConfig, n_trunc: usize) -> Result<Reconstruction> {
    let a = cfg.a;
    let set = crate::scene::build_wavenumbers_with(a, n_trunc, cfg.lambda_star)?;
    let lookup = |w: &Wavenumber| {
        fields
            .iter()
            .find(|f| (f.k - w.k).abs() <= 1e-10 * w.k)
            .copied()
            .ok_or(Error::NotAdmissible(w.k))
    };
    let mut propagated = Vec::with_capacity(set.len());
    let mut series_orders = Vec::with_capacity(set.len());
    for w in set.iter() {
        let field = lookup(w)?;
        let n_max = truncation_order(field, a, SERIES_TOLERANCE)?;
        let spectrum = angular_spectrum(field, n_max)?;
        propagated.push(propagate(&spectrum, field.radius, cfg.rho, &field.angles)?);
        series_orders.push((w.k, n_max));
    }

    let mut model = FourierModel::zeros(a, n_trunc);
    let mut nonzero = Vec::new();
    for l in lattice_vectors(n_trunc) {
        let k = core::f64::consts::PI / a * libm::sqrt((l[0] * l[0] + l[1] * l[1]) as f64);
        let i = set.index_of(k).ok_or(Error::NotAdmissible(k))?;
        let (w, dw) = &propagated[i];
        let s = fourier_coefficient(l, a, w, dw)?;
        model.set(l, s)?;
        nonzero.push((l, s));
    }
    let (w, dw) = &propagated[0];
    model.set([0, 0], zeroth_coefficient(w, dw, &nonzero, a, cfg.lambda_star)?)?;
    Ok(Reconstruction { model, series_orders })
}

/// One noisy realisation of the full procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub epsilon: f64,
    pub seed: u64,
    pub n_trunc: usize,
    pub retrieval: Vec<RetrievalErrors>,
    pub diagnostics: Vec<(f64, Vec<SectorDiagnostics>)>,
    pub reconstruction: Reconstruction,
    pub retrieved: Vec<RetrievedField>,
}

impl TrialOutcome {
    pub fn bound_holds(&self) -> bool {
        self.diagnostics
            .iter()
            .all(|(_, d)| d.iter().all(|d| d.min_abs_det >= d.bound))
    }
}

/// Measure, retrieve and reconstruct with truncation `n_trunc`, using the
/// cached exact fields `sims`. Noise sub-streams are keyed by position in the
/// full admissible set of `cfg`, so a subset of fields sees the same noise.
pub fn run_trial(
    sims: &[SimulatedField],
    cfg: &SceneConfig,
    epsilon: f64,
    seed: u64,
    n_trunc: usize,
) -> Result<TrialOutcome> {
    let needed = crate::scene::build_wavenumbers_with(cfg.a, n_trunc, cfg.lambda_star)?;
    let full = cfg.wavenumbers()?;
    let mut retrieved = Vec::with_capacity(needed.len());
    let mut retrieval = Vec::with_capacity(needed.len());
    let mut diagnostics = Vec::with_capacity(needed.len());
    for sim in sims {
        if needed.find(sim.wavenumber.k).is_none() {
            continue;
        }
        let k_index = full
            .index_of(sim.wavenumber.k)
            .ok_or(Error::NotAdmissible(sim.wavenumber.k))?;
        let field = retrieve_one(sim, cfg, k_index, epsilon, seed)?;
        retrieval.push(retrieval_errors(&sim.field, &field, cfg.m)?);
        diagnostics.push((sim.wavenumber.k, field.diagnostics.clone()));
        retrieved.push(field);
    }
    let circles: Vec<ComplexFieldOnCircle> = retrieved
        .iter()
        .map(|r| ComplexFieldOnCircle {
            k: r.k,
            radius: r.radius,
            angles: r.angles.clone(),
            values: r.values.clone(),
        })
        .collect();
    let refs: Vec<&ComplexFieldOnCircle> = circles.iter().collect();
    let reconstruction = reconstruct(&refs, cfg, n_trunc)?;
    Ok(TrialOutcome {
        epsilon,
        seed,
        n_trunc,
        retrieval,
        diagnostics,
        reconstruction,
        retrieved,
    })
}

/// `||S_N - S|| / ||S||` on the cell-centred `n_eval x n_eval` grid, with the
/// evaluated reconstruction.
pub fn reconstruction_error<S: Source + ?Sized>(
    model: &FourierModel,
    source: &S,
    n_eval: usize,
) -> Result<(f64, ComplexGrid)> {
    let grid = evaluate_model(model, n_eval);
    let exact = SourceGrid::sample(source, model.a, n_eval);
    Ok((relative_l2_real(&exact.values, &grid.values)?, grid))
}
