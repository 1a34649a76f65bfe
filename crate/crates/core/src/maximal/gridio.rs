//! Flat binary grid files and CSV import.
//!
//! Binary layout: `u32 nx`, `u32 ny`, `f64 pitch`, then `nx·ny` row-major
//! `f64` values, all little-endian. The origin is not stored; loaded fields
//! sit at `(0, 0)`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point;

use super::grid::{GridLayout, ScalarField};

pub fn write_grid<W: Write>(f: &ScalarField, mut out: W) -> Result<()> {
    let l = f.layout();
    let dim = |n: usize| u32::try_from(n).map_err(|_| Error::Format(format!("dimension {n} exceeds u32")));
    out.write_all(&dim(l.nx)?.to_le_bytes())?;
    out.write_all(&dim(l.ny)?.to_le_bytes())?;
    out.write_all(&l.pitch.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * f.values().len());
    for v in f.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_grid<R: Read>(mut input: R) -> Result<ScalarField> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header).map_err(|e| Error::Format(format!("grid header: {e}")))?;
    let nx = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let ny = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let pitch = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    let expected = nx.checked_mul(ny).and_then(|n| n.checked_mul(8));
    if expected != Some(body.len()) {
        return Err(Error::Format(format!("grid body has {} bytes, header declares {nx}x{ny}", body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let layout = GridLayout::new(Point::new(0.0, 0.0), pitch, nx, ny).map_err(|e| Error::Format(e.to_string()))?;
    ScalarField::new(layout, values).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_grid(f: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_grid(f, std::io::BufWriter::new(file))
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<ScalarField> {
    read_grid(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Parses comma-separated rows; the first line is row `j = 0`. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse_csv(text: &str, origin: Point, pitch: f64) -> Result<ScalarField> {
    let mut values = Vec::new();
    let mut nx = None;
    let mut ny = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        match nx {
            None => nx = Some(row.len()),
            Some(n) if n != row.len() => {
                return Err(Error::Format(format!("line {}: expected {n} columns, got {}", lineno + 1, row.len())))
            }
            _ => {}
        }
        values.extend(row);
        ny += 1;
    }
    let nx = nx.ok_or_else(|| Error::Format("empty CSV grid".into()))?;
    let layout = GridLayout::new(origin, pitch, nx, ny)?;
    ScalarField::new(layout, values).map_err(|e| Error::Format(e.to_string()))
}
