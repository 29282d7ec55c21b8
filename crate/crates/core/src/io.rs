//! CSV formats.
//!
//! * fields: `x,omega,re,im` (time-frequency) or `x,y,re,im` (half-plane), row-major, one row per cell center;
//! * radial profiles: `r,value`, strictly increasing `r`;
//! * disc-model profiles: `x,value`, strictly increasing `x`;
//! * spectra: `k,eigenvalue`.

use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::gabor::OperatorSpectrum;
use crate::wavelet::{DiscKind, DiscProfile};
use crate::weights::{Grid, Measure, ProfileKind, RadialProfile, WeightField};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => parse_err(line, format!("{kind:?}")),
    }
}

/// Header plus numeric rows, with their line numbers.
fn read_table<R: Read>(reader: R) -> Result<(Vec<String>, Vec<(usize, Vec<f64>)>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let values = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| parse_err(line, format!("not a number: {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push((line, values));
    }
    Ok((header, rows))
}

fn expect_header(header: &[String], options: &[&[&str]]) -> Result<usize> {
    options
        .iter()
        .position(|h| header.len() == h.len() && header.iter().zip(h.iter()).all(|(a, b)| a == b))
        .ok_or_else(|| {
            let wanted: Vec<String> = options.iter().map(|h| h.join(",")).collect();
            parse_err(1, format!("header {:?} is not one of {}", header.join(","), wanted.join(" | ")))
        })
}

/// Cell edges from sorted cell centers: midpoints inside, mirrored half-steps at the ends.
fn edges_from_centers(centers: &[f64], log: bool) -> Vec<f64> {
    let t: Vec<f64> = if log { centers.iter().map(|c| c.ln()).collect() } else { centers.to_vec() };
    let n = t.len();
    let mut e = Vec::with_capacity(n + 1);
    e.push(t[0] - 0.5 * (t[1] - t[0]));
    e.extend(t.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    e.push(t[n - 1] + 0.5 * (t[n - 1] - t[n - 2]));
    if log {
        e.into_iter().map(f64::exp).collect()
    } else {
        e
    }
}

pub fn read_field<R: Read>(reader: R) -> Result<WeightField> {
    let (header, rows) = read_table(reader)?;
    let measure = match expect_header(&header, &[&["x", "omega", "re", "im"], &["x", "y", "re", "im"]])? {
        0 => Measure::Lebesgue,
        _ => Measure::Hyperbolic,
    };
    if rows.is_empty() {
        return Err(parse_err(2, "field has no rows"));
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (line, r) in &rows {
        if r.len() != 4 {
            return Err(parse_err(*line, "expected 4 columns"));
        }
        if xs.last() != Some(&r[0]) {
            if xs.last().is_some_and(|&l| r[0] <= l) {
                return Err(parse_err(*line, "x must be nondecreasing (row-major order)"));
            }
            xs.push(r[0]);
        }
        if xs.len() == 1 {
            ys.push(r[1]);
        }
    }
    let (nx, ny) = (xs.len(), ys.len());
    if nx * ny != rows.len() {
        return Err(parse_err(rows.last().map_or(0, |r| r.0), format!("{} rows do not form a {nx}x{ny} grid", rows.len())));
    }
    if nx < 2 || ny < 2 {
        return Err(invalid("a field needs at least 2 cells per axis"));
    }
    let mut values = Array2::zeros((nx, ny));
    for (idx, (line, r)) in rows.iter().enumerate() {
        let (i, j) = (idx / ny, idx % ny);
        if r[0] != xs[i] || r[1] != ys[j] {
            return Err(parse_err(*line, "rows are not a row-major tensor grid"));
        }
        values[[i, j]] = Complex64::new(r[2], r[3]);
    }
    let log_y = measure == Measure::Hyperbolic;
    let grid = Grid::from_edges(edges_from_centers(&xs, false), edges_from_centers(&ys, log_y), log_y)?;
    WeightField::new(grid, values, measure)
}

pub fn write_field<W: Write>(writer: W, field: &WeightField) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let y_name = if field.measure() == Measure::Hyperbolic { "y" } else { "omega" };
    w.write_record(["x", y_name, "re", "im"]).map_err(csv_err)?;
    let g = field.grid();
    for ((i, j), v) in field.values().indexed_iter() {
        w.serialize((g.x_center(i), g.y_center(j), v.re, v.im)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `r,value` as a sampled (left-continuous step) profile.
pub fn read_profile<R: Read>(reader: R) -> Result<RadialProfile> {
    let (header, rows) = read_table(reader)?;
    expect_header(&header, &[&["r", "value"]])?;
    let (radii, values) = two_columns(&rows)?;
    RadialProfile::sampled(radii, values)
}

/// Reads `x,value` as a sampled disc-model profile.
pub fn read_disc_profile<R: Read>(reader: R) -> Result<DiscProfile> {
    let (header, rows) = read_table(reader)?;
    expect_header(&header, &[&["x", "value"]])?;
    let (xs, values) = two_columns(&rows)?;
    DiscProfile::new(DiscKind::Sampled { xs, values })
}

fn two_columns(rows: &[(usize, Vec<f64>)]) -> Result<(Vec<f64>, Vec<f64>)> {
    if rows.is_empty() {
        return Err(parse_err(2, "profile has no rows"));
    }
    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        if r.len() != 2 {
            return Err(parse_err(*line, "expected 2 columns"));
        }
        if a.last().is_some_and(|&l: &f64| r[0] <= l) {
            return Err(parse_err(*line, "abscissae must be strictly increasing"));
        }
        a.push(r[0]);
        b.push(r[1]);
    }
    Ok((a, b))
}

/// Samples of a profile: the knots of a sampled profile, otherwise `n` radii up to
/// where it falls below `1e−12` of its sup (with breakpoints included).
pub fn profile_samples(profile: &RadialProfile, n: usize) -> Vec<(f64, f64)> {
    if let ProfileKind::Sampled { radii, values } = &profile.kind {
        return radii.iter().copied().zip(values.iter().copied()).collect();
    }
    let end = profile.effective_radius(1e-12).unwrap_or(10.0).max(1e-3);
    let mut rs: Vec<f64> = (0..n).map(|i| end * (i + 1) as f64 / n as f64).collect();
    rs.extend(profile.breakpoints());
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    rs.into_iter().map(|r| (r, profile.value(r))).collect()
}

pub fn disc_profile_samples(profile: &DiscProfile, n: usize) -> Vec<(f64, f64)> {
    if let DiscKind::Sampled { xs, values } = &profile.kind {
        return xs.iter().copied().zip(values.iter().copied()).collect();
    }
    let mut xs: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / n as f64).collect();
    xs.extend(profile.breakpoints().into_iter().filter(|&x| x > 0.0));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.into_iter().map(|x| (x, profile.value(x))).collect()
}

pub fn write_profile<W: Write>(writer: W, samples: &[(f64, f64)]) -> Result<()> {
    write_pairs(writer, ["r", "value"], samples)
}

pub fn write_disc_profile<W: Write>(writer: W, samples: &[(f64, f64)]) -> Result<()> {
    write_pairs(writer, ["x", "value"], samples)
}

fn write_pairs<W: Write>(writer: W, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum<W: Write>(writer: W, spectrum: &OperatorSpectrum) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["k", "eigenvalue"]).map_err(csv_err)?;
    for (k, v) in spectrum.eigenvalues.iter().enumerate() {
        w.serialize((k, v)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
