//! Grid function import/export.
//!
//! CSV: one row per sample in row-major order, columns `x` (or `x1,x2`),
//! `re`, `im`.
//!
//! Binary: `n: u32`, `N: u32`, `L: f64`, then `N^n` complex64 samples
//! (`f32` real, `f32` imaginary), all little-endian.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{GridFunction, GridSpec};
use crate::error::{Error, Result};

const HEADER_LEN: usize = 4 + 4 + 8;

pub fn write_csv<W: Write>(f: &GridFunction, out: W) -> Result<()> {
    let spec = f.spec();
    let mut w = csv::Writer::from_writer(out);
    if spec.dim() == 1 {
        w.write_record(["x", "re", "im"])?;
    } else {
        w.write_record(["x1", "x2", "re", "im"])?;
    }
    for (i, v) in f.values().iter().enumerate() {
        let [a, b] = spec.coordinate(i);
        if spec.dim() == 1 {
            w.write_record([a.to_string(), v.re.to_string(), v.im.to_string()])?;
        } else {
            w.write_record([a.to_string(), b.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`]; the grid shape is inferred from the
/// header and the coordinate range.
pub fn read_csv<R: Read>(input: R) -> Result<GridFunction> {
    let mut r = csv::Reader::from_reader(input);
    let dim = match r.headers()?.len() {
        3 => 1,
        4 => 2,
        k => return Err(Error::InvalidArgument(format!("expected 3 or 4 CSV columns, got {k}"))),
    };
    let mut first = f64::NAN;
    let mut values = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad CSV number `{}`: {e}", &record[i])))
        };
        if values.is_empty() {
            first = field(0)?;
        }
        values.push(Complex64::new(field(dim)?, field(dim + 1)?));
    }
    let points = match dim {
        1 => values.len(),
        _ => (values.len() as f64).sqrt().round() as usize,
    };
    let spec = GridSpec::new(dim, points, -first)?;
    GridFunction::new(spec, values)
}

pub fn write_binary<W: Write>(f: &GridFunction, mut out: W) -> Result<()> {
    let spec = f.spec();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * spec.len());
    buf.extend_from_slice(&(spec.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(spec.points() as u32).to_le_bytes());
    buf.extend_from_slice(&spec.half_period().to_le_bytes());
    for v in f.values() {
        buf.extend_from_slice(&(v.re as f32).to_le_bytes());
        buf.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<GridFunction> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(Error::InvalidArgument("binary grid function shorter than header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let dim = u32_at(0) as usize;
    let points = u32_at(4) as usize;
    let half_period = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let spec = GridSpec::new(dim, points, half_period)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * spec.len() {
        return Err(Error::InvalidArgument(format!(
            "binary body has {} bytes, expected {}",
            body.len(),
            8 * spec.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes(c[0..4].try_into().unwrap());
            let im = f32::from_le_bytes(c[4..8].try_into().unwrap());
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    GridFunction::new(spec, values)
}
