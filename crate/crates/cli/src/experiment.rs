//! Stage runners: simulate, retrieve, reconstruct, the full pipeline and the
//! error tables.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use phaseless_core::forward::{measure_field, ComplexFieldOnCircle, PhaselessRecord, QuadratureOptions, Source, SourceGrid};
use phaseless_core::fourier::{ComplexGrid, FourierModel};
use phaseless_core::pipeline::{
    reconstruct, reconstruction_error, retrieval_errors, run_trial, simulate_one, RetrievalErrors, SimulatedField,
};
use phaseless_core::retrieval::{retrieve_all, RetrievedField, SectorDiagnostics};
use phaseless_core::scene::{SceneConfig, WaveKind, WaveNumberSet, Wavenumber};
use phaseless_core::sources::Mountain;

use crate::config::RunConfig;
use crate::formats::{self, fmt, GridDump};
use crate::CliError;

/// Lattice shells `|l|^2` reported in the retrieval tables, next to `k*`.
pub const TABLE_SHELLS: [u32; 3] = [1, 25, 100];

/// Noise levels of the retrieval tables.
pub const TABLE_NOISE: [f64; 4] = [0.0, 0.001, 0.01, 0.05];

/// Noise levels of the reconstruction table.
pub const RECONSTRUCTION_NOISE: [f64; 3] = [0.01, 0.02, 0.05];

/// The built-in mountain source or a grid dump read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Mountain,
    Grid(SourceGrid),
}

impl SourceSpec {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        if spec == "mountain" {
            return Ok(SourceSpec::Mountain);
        }
        let path = Path::new(spec);
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        match formats::read_grid(file)? {
            GridDump::Real(g) => Ok(SourceSpec::Grid(g)),
            GridDump::Complex(_) => Err(CliError::Format("a source grid must be real".into())),
        }
    }

    fn check(&self, a: f64) -> Result<(), CliError> {
        match self {
            SourceSpec::Grid(g) if (g.a - a).abs() > 1e-12 * a => Err(CliError::Config(format!(
                "source grid covers (-{}, {})^2 but a = {a}",
                g.a, g.a
            ))),
            _ => Ok(()),
        }
    }
}

impl Source for SourceSpec {
    fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            SourceSpec::Mountain => Mountain.value(x),
            SourceSpec::Grid(g) => g.value(x),
        }
    }
}

pub fn quadrature(run: &RunConfig) -> QuadratureOptions {
    QuadratureOptions {
        n_start: run.n_src,
        tolerance: 1e-3,
        n_limit: 4096,
    }
}

/// Which wavenumbers to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    /// Wavenumbers needed for truncation `N`, plus `k*`.
    UpTo(usize),
    /// `k*` and [`TABLE_SHELLS`].
    Tables,
}

/// Exact fields of one source, kept for reuse across noise levels and seeds.
pub struct Experiment<S> {
    pub run: RunConfig,
    pub scene: SceneConfig,
    pub set: WaveNumberSet,
    pub source: S,
    /// Indexed like `set`; `None` where not simulated.
    pub sims: Vec<Option<SimulatedField>>,
    pub simulation_time: Duration,
}

impl<S: Source> Experiment<S> {
    pub fn new(run: RunConfig, source: S, selection: Selection) -> Result<Self, CliError> {
        run.validate()?;
        let scene = run.scene();
        let set = scene.wavenumbers()?;
        let wanted = |w: &Wavenumber| match (selection, w.kind) {
            (Selection::All, _) | (_, WaveKind::Star) => true,
            (Selection::UpTo(n), WaveKind::Lattice { norm_sq }) => {
                // shells reachable with |l|_inf <= n
                (0..=n as u32).any(|l1| (0..=n as u32).any(|l2| l1 * l1 + l2 * l2 == norm_sq))
            }
            (Selection::Tables, WaveKind::Lattice { norm_sq }) => TABLE_SHELLS.contains(&norm_sq),
        };
        let opts = quadrature(&run);
        let start = Instant::now();
        let sims = set
            .iter()
            .map(|w| {
                if wanted(w) {
                    simulate_one(&source, &scene, w, &opts).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            run,
            scene,
            set,
            source,
            sims,
            simulation_time: start.elapsed(),
        })
    }

    /// Simulated fields in wavenumber order, with their index in the full set.
    pub fn simulated(&self) -> impl Iterator<Item = (usize, &SimulatedField)> {
        self.sims.iter().enumerate().filter_map(|(i, s)| s.as_ref().map(|s| (i, s)))
    }

    pub fn sim_for(&self, w: &Wavenumber) -> Option<&SimulatedField> {
        self.set.index_of(w.k).and_then(|i| self.sims[i].as_ref())
    }

    /// Phaseless data at every simulated wavenumber.
    pub fn measure(&self, eps: f64, seed: u64) -> Result<Vec<(usize, PhaselessRecord)>, CliError> {
        self.simulated()
            .map(|(i, s)| Ok((i, measure_field(&s.field, &self.scene, &s.wavenumber, i, eps, seed)?)))
            .collect()
    }

    /// Full measure-retrieve-reconstruct run. Needs every wavenumber up to
    /// the truncation for `eps` to be simulated.
    pub fn trial(&self, eps: f64, seed: u64) -> Result<ExperimentReport, CliError> {
        let n_trunc = self.run.truncation_for(eps)?;
        let all: Vec<SimulatedField> = self.simulated().map(|(_, s)| s.clone()).collect();
        let t0 = Instant::now();
        let out = run_trial(&all, &self.scene, eps, seed, n_trunc)?;
        let t1 = Instant::now();
        let (reconstruction_l2, grid) = reconstruction_error(&out.reconstruction.model, &self.source, self.run.n_eval)?;
        let t2 = Instant::now();
        let mut per_k = Vec::with_capacity(out.retrieval.len());
        for (errors, (_, diagnostics)) in out.retrieval.into_iter().zip(out.diagnostics) {
            let k = errors.k;
            let sim = all
                .iter()
                .find(|s| s.wavenumber.k == k)
                .ok_or(phaseless_core::Error::NotAdmissible(k))?;
            let n_max = out
                .reconstruction
                .series_orders
                .iter()
                .find(|(kk, _)| *kk == k)
                .map_or(0, |(_, n)| *n);
            per_k.push(KReport {
                index: self.set.index_of(k).ok_or(phaseless_core::Error::NotAdmissible(k))?,
                wavenumber: sim.wavenumber,
                n_src: sim.n_src,
                quadrature_change: sim.quadrature_change,
                n_max,
                errors,
                diagnostics,
            });
        }
        Ok(ExperimentReport {
            epsilon: eps,
            seed,
            n_trunc,
            per_k,
            reconstruction_l2,
            max_imaginary: grid.max_imaginary(),
            model: out.reconstruction.model,
            grid,
            retrieved: out.retrieved,
            timings: vec![
                ("simulate", self.simulation_time),
                ("retrieve+reconstruct", t1 - t0),
                ("evaluate", t2 - t1),
            ],
        })
    }

    /// Errors on the first sector at the table wavenumbers, one row per
    /// (noise level, wavenumber), summarised over `seeds` seeds.
    pub fn retrieval_table(&self, noise: &[f64], seeds: u64) -> Result<Vec<TableRow>, CliError> {
        let mut rows = Vec::new();
        for &eps in noise {
            for (i, sim) in self.simulated() {
                let w = sim.wavenumber;
                if !is_table_wavenumber(&w) {
                    continue;
                }
                let mut l2 = Vec::new();
                let mut linf = Vec::new();
                for seed in 0..seeds {
                    let rec = measure_field(&sim.field, &self.scene, &w, i, eps, seed)?;
                    let got = retrieve_all(&rec, &self.scene, &w)?;
                    let e = retrieval_errors(&sim.field, &got, self.scene.m)?;
                    l2.push(e.sectors[0].0);
                    linf.push(e.sectors[0].1);
                }
                rows.push(TableRow {
                    epsilon: eps,
                    k: w.k,
                    l2: Summary::of(&l2),
                    linf: Summary::of(&linf),
                });
            }
        }
        Ok(rows)
    }

    /// Reconstruction error summarised over `seeds` seeds per noise level.
    pub fn reconstruction_table(&self, noise: &[f64], seeds: u64) -> Result<Vec<(f64, usize, Summary)>, CliError> {
        noise
            .iter()
            .map(|&eps| {
                let errors = (0..seeds)
                    .map(|seed| self.trial(eps, seed).map(|r| r.reconstruction_l2))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((eps, self.run.truncation_for(eps)?, Summary::of(&errors)))
            })
            .collect()
    }
}

pub fn is_table_wavenumber(w: &Wavenumber) -> bool {
    match w.kind {
        WaveKind::Star => true,
        WaveKind::Lattice { norm_sq } => TABLE_SHELLS.contains(&norm_sq),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, min, max }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub epsilon: f64,
    pub k: f64,
    pub l2: Summary,
    pub linf: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KReport {
    /// Position in the admissible set.
    pub index: usize,
    pub wavenumber: Wavenumber,
    pub n_src: usize,
    pub quadrature_change: f64,
    pub n_max: usize,
    pub errors: RetrievalErrors,
    pub diagnostics: Vec<SectorDiagnostics>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub epsilon: f64,
    pub seed: u64,
    pub n_trunc: usize,
    pub per_k: Vec<KReport>,
    pub reconstruction_l2: f64,
    pub max_imaginary: f64,
    pub model: FourierModel,
    pub grid: ComplexGrid,
    pub retrieved: Vec<RetrievedField>,
    /// Wall-clock time per stage; printed, never written to the CSV artifacts.
    pub timings: Vec<(&'static str, Duration)>,
}

impl ExperimentReport {
    pub fn breach(&self) -> Option<CliError> {
        self.per_k.iter().find_map(|r| {
            r.diagnostics.iter().find(|d| d.min_abs_det < d.bound).map(|d| CliError::BoundBreach {
                k: r.wavenumber.k,
                sector: d.sector,
                min_abs_det: d.min_abs_det,
                bound: d.bound,
            })
        })
    }

    /// Write `report.csv`, `retrieval_errors.csv`, `diagnostics.csv`,
    /// `coefficients.csv`, `summary.csv`, `reconstruction.grid`, and the
    /// retrieved fields in the layout read by `reconstruct`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        create_dir(dir)?;
        let mut index = csv_out(dir, "wavenumbers.csv")?;
        index.write_record(["index", "k"])?;
        for (r, field) in self.per_k.iter().zip(&self.retrieved) {
            index.write_record([r.index.to_string(), fmt(r.wavenumber.k)])?;
            formats::write_retrieved(create(dir, &field_name("retrieved", r.index))?, field)?;
        }
        index.flush().map_err(|e| CliError::io(dir, e))?;

        let mut out = csv_out(dir, "report.csv")?;
        out.write_record([
            "k", "kind", "n_src", "quadrature_change", "n_max", "l2", "linf", "l2_sector1", "linf_sector1", "min_det_margin",
        ])?;
        for r in &self.per_k {
            let margin = r.diagnostics.iter().map(|d| d.margin()).fold(f64::INFINITY, f64::min);
            out.write_record([
                fmt(r.wavenumber.k),
                kind_label(&r.wavenumber),
                r.n_src.to_string(),
                fmt(r.quadrature_change),
                r.n_max.to_string(),
                fmt(r.errors.total.0),
                fmt(r.errors.total.1),
                fmt(r.errors.sectors[0].0),
                fmt(r.errors.sectors[0].1),
                fmt(margin),
            ])?;
        }
        out.flush().map_err(|e| CliError::io(dir, e))?;

        let mut out = csv_out(dir, "retrieval_errors.csv")?;
        out.write_record(["k", "sector", "l2", "linf"])?;
        for r in &self.per_k {
            for (j, (l2, linf)) in r.errors.sectors.iter().enumerate() {
                out.write_record([fmt(r.wavenumber.k), (j + 1).to_string(), fmt(*l2), fmt(*linf)])?;
            }
        }
        out.flush().map_err(|e| CliError::io(dir, e))?;

        let diags: Vec<(f64, Vec<SectorDiagnostics>)> =
            self.per_k.iter().map(|r| (r.wavenumber.k, r.diagnostics.clone())).collect();
        formats::write_diagnostics(create(dir, "diagnostics.csv")?, &diags)?;
        formats::write_coefficients(create(dir, "coefficients.csv")?, &self.model)?;

        let mut out = csv_out(dir, "summary.csv")?;
        out.write_record(["epsilon", "seed", "N", "reconstruction_l2", "max_imaginary"])?;
        out.write_record([
            fmt(self.epsilon),
            self.seed.to_string(),
            self.n_trunc.to_string(),
            fmt(self.reconstruction_l2),
            fmt(self.max_imaginary),
        ])?;
        out.flush().map_err(|e| CliError::io(dir, e))?;

        let path = dir.join("reconstruction.grid");
        formats::write_complex_grid(create(dir, "reconstruction.grid")?, &self.grid).map_err(|e| CliError::io(&path, e))
    }
}

fn kind_label(w: &Wavenumber) -> String {
    match w.kind {
        WaveKind::Star => "star".into(),
        WaveKind::Lattice { norm_sq } => format!("lattice{norm_sq}"),
    }
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| CliError::io(&path, e))
}

fn open(dir: &Path, name: &str) -> Result<File, CliError> {
    let path = dir.join(name);
    File::open(&path).map_err(|e| CliError::io(&path, e))
}

fn csv_out(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    Ok(csv::Writer::from_writer(create(dir, name)?))
}

fn field_name(prefix: &str, index: usize) -> String {
    format!("{prefix}_k{index:03}.csv")
}

/// `simulate`: exact fields and noisy phaseless data for every simulated
/// wavenumber, plus `wavenumbers.csv` listing them.
pub fn write_simulation<S: Source>(exp: &Experiment<S>, eps: f64, seed: u64, dir: &Path) -> Result<(), CliError> {
    create_dir(dir)?;
    let mut index = csv_out(dir, "wavenumbers.csv")?;
    index.write_record(["index", "k", "kind", "radius", "n_src", "quadrature_change"])?;
    for (i, record) in exp.measure(eps, seed)? {
        let sim = exp.sims[i].as_ref().expect("measured wavenumbers are simulated");
        index.write_record([
            i.to_string(),
            fmt(sim.wavenumber.k),
            kind_label(&sim.wavenumber),
            fmt(sim.field.radius),
            sim.n_src.to_string(),
            fmt(sim.quadrature_change),
        ])?;
        formats::write_field(create(dir, &field_name("exact", i))?, &sim.field)?;
        formats::write_record(create(dir, &field_name("phaseless", i))?, &record)?;
        formats::write_scaling(create(dir, &field_name("scaling", i))?, &record.scaling)?;
    }
    index.flush().map_err(|e| CliError::io(dir, e))?;
    Ok(())
}

/// `(index, wavenumber)` pairs listed in `wavenumbers.csv`.
fn read_index(scene: &SceneConfig, dir: &Path) -> Result<Vec<(usize, Wavenumber)>, CliError> {
    let set = scene.wavenumbers()?;
    let mut reader = csv::Reader::from_reader(open(dir, "wavenumbers.csv")?);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let i: usize = row[0].parse().map_err(|_| CliError::Format(format!("bad index {:?}", &row[0])))?;
        let k: f64 = row[1].parse().map_err(|_| CliError::Format(format!("bad wavenumber {:?}", &row[1])))?;
        let w = *set.find(k).ok_or(phaseless_core::Error::NotAdmissible(k))?;
        if set.index_of(k) != Some(i) {
            return Err(CliError::Config(format!(
                "wavenumber {k} listed at index {i} does not match the configuration"
            )));
        }
        out.push((i, w));
    }
    Ok(out)
}

/// `retrieve`: phaseless data from a `simulate` directory to retrieved
/// fields and `diagnostics.csv`. A breached determinant bound is reported
/// after all files are written.
pub fn retrieve_dir(run: &RunConfig, input: &Path, out: &Path) -> Result<Vec<RetrievedField>, CliError> {
    let scene = run.scene();
    create_dir(out)?;
    let mut fields = Vec::new();
    let mut diags = Vec::new();
    let mut index = csv_out(out, "wavenumbers.csv")?;
    index.write_record(["index", "k"])?;
    for (i, w) in read_index(&scene, input)? {
        let record = formats::read_record(
            open(input, &field_name("phaseless", i))?,
            open(input, &field_name("scaling", i))?,
            w.k,
            scene.radius_for(&w),
        )?;
        let got = retrieve_all(&record, &scene, &w)?;
        formats::write_retrieved(create(out, &field_name("retrieved", i))?, &got)?;
        index.write_record([i.to_string(), fmt(w.k)])?;
        diags.push((w.k, got.diagnostics.clone()));
        fields.push(got);
    }
    index.flush().map_err(|e| CliError::io(out, e))?;
    formats::write_diagnostics(create(out, "diagnostics.csv")?, &diags)?;
    for (k, ds) in &diags {
        if let Some(d) = ds.iter().find(|d| d.min_abs_det < d.bound) {
            return Err(CliError::BoundBreach {
                k: *k,
                sector: d.sector,
                min_abs_det: d.min_abs_det,
                bound: d.bound,
            });
        }
    }
    Ok(fields)
}

/// `reconstruct`: Fourier model from a `retrieve` directory. Writes
/// `coefficients.csv` and `reconstruction.grid`; with a reference source
/// also `summary.csv` holding the relative error.
pub fn reconstruct_dir(
    run: &RunConfig,
    input: &Path,
    out: &Path,
    n_trunc: usize,
    reference: Option<&SourceSpec>,
) -> Result<(FourierModel, Option<f64>), CliError> {
    let scene = run.scene();
    let mut fields: Vec<ComplexFieldOnCircle> = Vec::new();
    for (i, w) in read_index(&scene, input)? {
        let field = formats::read_retrieved(open(input, &field_name("retrieved", i))?, scene.radius_for(&w))?;
        if (field.k - w.k).abs() > 1e-10 * w.k {
            return Err(CliError::Format(format!("{} holds k = {}", field_name("retrieved", i), field.k)));
        }
        fields.push(field);
    }
    let refs: Vec<&ComplexFieldOnCircle> = fields.iter().collect();
    let model = reconstruct(&refs, &scene, n_trunc)?.model;
    create_dir(out)?;
    formats::write_coefficients(create(out, "coefficients.csv")?, &model)?;
    let grid = phaseless_core::fourier::evaluate_model(&model, run.n_eval);
    let path: PathBuf = out.join("reconstruction.grid");
    formats::write_complex_grid(create(out, "reconstruction.grid")?, &grid).map_err(|e| CliError::io(&path, e))?;
    let error = match reference {
        Some(src) => {
            src.check(run.a)?;
            let (e, _) = reconstruction_error(&model, src, run.n_eval)?;
            let mut w = csv_out(out, "summary.csv")?;
            w.write_record(["N", "reconstruction_l2"])?;
            w.write_record([n_trunc.to_string(), fmt(e)])?;
            w.flush().map_err(|e| CliError::io(out, e))?;
            Some(e)
        }
        None => None,
    };
    Ok((model, error))
}

pub fn write_retrieval_table(rows: &[TableRow], dir: &Path) -> Result<(), CliError> {
    create_dir(dir)?;
    let mut out = csv_out(dir, "table_retrieval.csv")?;
    out.write_record([
        "epsilon", "k", "l2_mean", "l2_min", "l2_max", "linf_mean", "linf_min", "linf_max",
    ])?;
    for r in rows {
        out.write_record([
            fmt(r.epsilon),
            fmt(r.k),
            fmt(r.l2.mean),
            fmt(r.l2.min),
            fmt(r.l2.max),
            fmt(r.linf.mean),
            fmt(r.linf.min),
            fmt(r.linf.max),
        ])?;
    }
    out.flush().map_err(|e| CliError::io(dir, e))
}

pub fn write_reconstruction_table(rows: &[(f64, usize, Summary)], dir: &Path) -> Result<(), CliError> {
    create_dir(dir)?;
    let mut out = csv_out(dir, "table_reconstruction.csv")?;
    out.write_record(["epsilon", "N", "l2_mean", "l2_min", "l2_max"])?;
    for (eps, n, s) in rows {
        out.write_record([fmt(*eps), n.to_string(), fmt(s.mean), fmt(s.min), fmt(s.max)])?;
    }
    out.flush().map_err(|e| CliError::io(dir, e))
}

pub fn check_source(spec: &SourceSpec, run: &RunConfig) -> Result<(), CliError> {
    spec.check(run.a)
}
