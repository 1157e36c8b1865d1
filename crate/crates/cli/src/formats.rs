//! CSV tables and grid dumps.
//!
//! Floats are written in shortest round-trip exponent form (`{:e}`), so a
//! write-read cycle is exact and equal inputs give byte-identical files.
//!
//! A grid dump is three header lines followed by `n * n` row-major values,
//! one per line (`re im` for complex grids):
//!
//! ```text
//! a 3e-1
//! n 800
//! dtype real
//! ```

use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64;
use phaseless_core::forward::{ComplexFieldOnCircle, PhaselessRecord, SourceGrid};
use phaseless_core::fourier::{ComplexGrid, FourierModel};
use phaseless_core::retrieval::{RetrievedField, SectorDiagnostics};

use crate::CliError;

pub fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Format(format!("not a number: {s:?}")))
}

fn parse_usize(s: &str) -> Result<usize, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Format(format!("not an index: {s:?}")))
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>, CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn rows<R: Read>(r: R, header: &[&str]) -> Result<Vec<csv::StringRecord>, CliError> {
    let mut reader = csv::Reader::from_reader(r);
    let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(CliError::Format(format!("expected columns {header:?}, found {found:?}")));
    }
    reader.records().map(|r| r.map_err(CliError::from)).collect()
}

/// `theta,re,im`.
pub fn write_field<W: Write>(w: W, field: &ComplexFieldOnCircle) -> Result<(), CliError> {
    let mut out = writer(w, &["theta", "re", "im"])?;
    for (t, u) in field.angles.iter().zip(&field.values) {
        out.write_record([fmt(*t), fmt(u.re), fmt(u.im)])?;
    }
    out.flush().map_err(|e| CliError::io("field".as_ref(), e))?;
    Ok(())
}

pub fn read_field<R: Read>(r: R, k: f64, radius: f64) -> Result<ComplexFieldOnCircle, CliError> {
    let mut angles = Vec::new();
    let mut values = Vec::new();
    for row in rows(r, &["theta", "re", "im"])? {
        angles.push(parse_f64(&row[0])?);
        values.push(Complex64::new(parse_f64(&row[1])?, parse_f64(&row[2])?));
    }
    Ok(ComplexFieldOnCircle { k, radius, angles, values })
}

/// `theta,sector,abs_u,abs_v1,abs_v2`.
pub fn write_record<W: Write>(w: W, record: &PhaselessRecord) -> Result<(), CliError> {
    let mut out = writer(w, &["theta", "sector", "abs_u", "abs_v1", "abs_v2"])?;
    for i in 0..record.angles.len() {
        out.write_record([
            fmt(record.angles[i]),
            record.sector[i].to_string(),
            fmt(record.abs_u[i]),
            fmt(record.abs_v[0][i]),
            fmt(record.abs_v[1][i]),
        ])?;
    }
    out.flush().map_err(|e| CliError::io("record".as_ref(), e))?;
    Ok(())
}

/// `sector,c1,c2`.
pub fn write_scaling<W: Write>(w: W, scaling: &[[f64; 2]]) -> Result<(), CliError> {
    let mut out = writer(w, &["sector", "c1", "c2"])?;
    for (j, c) in scaling.iter().enumerate() {
        out.write_record([(j + 1).to_string(), fmt(c[0]), fmt(c[1])])?;
    }
    out.flush().map_err(|e| CliError::io("scaling".as_ref(), e))?;
    Ok(())
}

pub fn read_record<R: Read, S: Read>(record: R, scaling: S, k: f64, radius: f64) -> Result<PhaselessRecord, CliError> {
    let mut rec = PhaselessRecord {
        k,
        radius,
        angles: Vec::new(),
        sector: Vec::new(),
        abs_u: Vec::new(),
        abs_v: [Vec::new(), Vec::new()],
        scaling: Vec::new(),
    };
    for row in rows(record, &["theta", "sector", "abs_u", "abs_v1", "abs_v2"])? {
        rec.angles.push(parse_f64(&row[0])?);
        rec.sector.push(parse_usize(&row[1])?);
        rec.abs_u.push(parse_f64(&row[2])?);
        rec.abs_v[0].push(parse_f64(&row[3])?);
        rec.abs_v[1].push(parse_f64(&row[4])?);
    }
    for (i, row) in rows(scaling, &["sector", "c1", "c2"])?.iter().enumerate() {
        if parse_usize(&row[0])? != i + 1 {
            return Err(CliError::Format("scaling rows must list sectors 1, 2, ... in order".into()));
        }
        rec.scaling.push([parse_f64(&row[1])?, parse_f64(&row[2])?]);
    }
    Ok(rec)
}

/// `theta,re,im,sector,k`.
pub fn write_retrieved<W: Write>(w: W, field: &RetrievedField) -> Result<(), CliError> {
    let mut out = writer(w, &["theta", "re", "im", "sector", "k"])?;
    for i in 0..field.angles.len() {
        let u = field.values[i];
        out.write_record([
            fmt(field.angles[i]),
            fmt(u.re),
            fmt(u.im),
            field.sector[i].to_string(),
            fmt(field.k),
        ])?;
    }
    out.flush().map_err(|e| CliError::io("retrieved".as_ref(), e))?;
    Ok(())
}

/// Retrieved samples as a field on a circle of the given radius.
pub fn read_retrieved<R: Read>(r: R, radius: f64) -> Result<ComplexFieldOnCircle, CliError> {
    let mut field = ComplexFieldOnCircle {
        k: f64::NAN,
        radius,
        angles: Vec::new(),
        values: Vec::new(),
    };
    for row in rows(r, &["theta", "re", "im", "sector", "k"])? {
        field.angles.push(parse_f64(&row[0])?);
        field.values.push(Complex64::new(parse_f64(&row[1])?, parse_f64(&row[2])?));
        let k = parse_f64(&row[4])?;
        if field.k.is_nan() {
            field.k = k;
        } else if field.k != k {
            return Err(CliError::Format("one wavenumber per retrieved file".into()));
        }
    }
    if field.values.is_empty() {
        return Err(CliError::Format("empty retrieved field".into()));
    }
    Ok(field)
}

/// `k,j,min_abs_det,bound,margin`.
pub fn write_diagnostics<W: Write>(w: W, rows: &[(f64, Vec<SectorDiagnostics>)]) -> Result<(), CliError> {
    let mut out = writer(w, &["k", "j", "min_abs_det", "bound", "margin"])?;
    for (k, diags) in rows {
        for d in diags {
            out.write_record([fmt(*k), d.sector.to_string(), fmt(d.min_abs_det), fmt(d.bound), fmt(d.margin())])?;
        }
    }
    out.flush().map_err(|e| CliError::io("diagnostics".as_ref(), e))?;
    Ok(())
}

/// `l1,l2,re,im`.
pub fn write_coefficients<W: Write>(w: W, model: &FourierModel) -> Result<(), CliError> {
    let mut out = writer(w, &["l1", "l2", "re", "im"])?;
    for (l, s) in model.entries() {
        out.write_record([l[0].to_string(), l[1].to_string(), fmt(s.re), fmt(s.im)])?;
    }
    out.flush().map_err(|e| CliError::io("coefficients".as_ref(), e))?;
    Ok(())
}

pub fn read_coefficients<R: Read>(r: R, a: f64) -> Result<FourierModel, CliError> {
    let mut entries = Vec::new();
    for row in rows(r, &["l1", "l2", "re", "im"])? {
        let l1: i32 = row[0].trim().parse().map_err(|_| CliError::Format(format!("bad index {:?}", &row[0])))?;
        let l2: i32 = row[1].trim().parse().map_err(|_| CliError::Format(format!("bad index {:?}", &row[1])))?;
        entries.push(([l1, l2], Complex64::new(parse_f64(&row[2])?, parse_f64(&row[3])?)));
    }
    let n = entries
        .iter()
        .map(|(l, _)| l[0].unsigned_abs().max(l[1].unsigned_abs()))
        .max()
        .unwrap_or(0) as usize;
    let mut model = FourierModel::zeros(a, n);
    for (l, s) in entries {
        model.set(l, s)?;
    }
    Ok(model)
}

fn write_header<W: Write>(w: &mut W, a: f64, n: usize, dtype: &str) -> std::io::Result<()> {
    writeln!(w, "a {}", fmt(a))?;
    writeln!(w, "n {n}")?;
    writeln!(w, "dtype {dtype}")
}

pub fn write_real_grid<W: Write>(mut w: W, grid: &SourceGrid) -> std::io::Result<()> {
    write_header(&mut w, grid.a, grid.n, "real")?;
    for v in &grid.values {
        writeln!(w, "{}", fmt(*v))?;
    }
    w.flush()
}

pub fn write_complex_grid<W: Write>(mut w: W, grid: &ComplexGrid) -> std::io::Result<()> {
    write_header(&mut w, grid.a, grid.n, "complex")?;
    for v in &grid.values {
        writeln!(w, "{} {}", fmt(v.re), fmt(v.im))?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridDump {
    Real(SourceGrid),
    Complex(ComplexGrid),
}

pub fn read_grid<R: Read>(r: R) -> Result<GridDump, CliError> {
    let mut lines = BufReader::new(r).lines();
    let mut header = |key: &str| -> Result<String, CliError> {
        let line = lines
            .next()
            .ok_or_else(|| CliError::Format("truncated grid header".into()))?
            .map_err(|e| CliError::io("grid".as_ref(), e))?;
        let (k, v) = line
            .split_once(' ')
            .ok_or_else(|| CliError::Format(format!("bad header line {line:?}")))?;
        if k != key {
            return Err(CliError::Format(format!("expected header {key:?}, found {k:?}")));
        }
        Ok(v.trim().to_owned())
    };
    let a = parse_f64(&header("a")?)?;
    let n = parse_usize(&header("n")?)?;
    let dtype = header("dtype")?;
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for line in lines {
        let line = line.map_err(|e| CliError::io("grid".as_ref(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        match dtype.as_str() {
            "real" => real.push(parse_f64(&line)?),
            "complex" => {
                let (re, im) = line
                    .split_once(' ')
                    .ok_or_else(|| CliError::Format(format!("bad complex value {line:?}")))?;
                complex.push(Complex64::new(parse_f64(re)?, parse_f64(im)?));
            }
            other => return Err(CliError::Format(format!("unknown dtype {other:?}"))),
        }
    }
    match dtype.as_str() {
        "real" => Ok(GridDump::Real(SourceGrid::new(a, n, real)?)),
        _ => {
            if complex.len() != n * n {
                return Err(CliError::Format(format!("expected {} values, found {}", n * n, complex.len())));
            }
            Ok(GridDump::Complex(ComplexGrid { a, n, values: complex }))
        }
    }
}
