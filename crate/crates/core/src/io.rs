//! Field snapshots as CSV (`node,value`) and as a small binary format.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! b"S1FIELD\0" | dim: u32 | resolution: u64 x dim | extents: f64 x dim | values: f64 x nodes
//! ```

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

pub const MAGIC: &[u8; 8] = b"S1FIELD\0";

pub fn write_csv<W: Write>(mut out: W, values: &[f64]) -> Result<()> {
    writeln!(out, "node,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v:e}")?;
    }
    Ok(())
}

/// Reads `node,value` rows; nodes must appear in order starting from 0.
pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim) != Some("node,value") {
        return Err(Error::Config("field CSV must start with the header node,value".into()));
    }
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = || Error::Config(format!("malformed field CSV row {}: {line:?}", row + 2));
        let (node, value) = line.split_once(',').ok_or_else(parse_err)?;
        let node: usize = node.trim().parse().map_err(|_| parse_err())?;
        if node != out.len() {
            return Err(Error::Config(format!(
                "field CSV row {} has node {node}, expected {}",
                row + 2,
                out.len()
            )));
        }
        out.push(value.trim().parse().map_err(|_| parse_err())?);
    }
    Ok(out)
}

pub fn write_binary<W: Write>(mut out: W, grid: &GridSpec, values: &[f64]) -> Result<()> {
    if values.len() != grid.num_nodes() {
        return Err(Error::Dimension(format!(
            "{} values for a grid of {} nodes",
            values.len(),
            grid.num_nodes()
        )));
    }
    out.write_all(MAGIC)?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for &n in grid.resolution() {
        out.write_all(&(n as u64).to_le_bytes())?;
    }
    for &e in grid.extents() {
        out.write_all(&e.to_le_bytes())?;
    }
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<(GridSpec, Vec<f64>)> {
    if &read_array::<8, _>(&mut input)? != MAGIC {
        return Err(Error::Config("not a field file (bad magic)".into()));
    }
    let dim = u32::from_le_bytes(read_array(&mut input)?) as usize;
    if !(1..=2).contains(&dim) {
        return Err(Error::Dimension(format!("field file declares dimension {dim}")));
    }
    let mut resolution = Vec::with_capacity(dim);
    for _ in 0..dim {
        let n = u64::from_le_bytes(read_array(&mut input)?);
        resolution.push(usize::try_from(n).map_err(|_| Error::Size(format!("resolution {n}")))?);
    }
    let mut extents = Vec::with_capacity(dim);
    for _ in 0..dim {
        extents.push(f64::from_le_bytes(read_array(&mut input)?));
    }
    let grid = GridSpec::from_parts(&extents, &resolution)?;
    let mut values = Vec::with_capacity(grid.num_nodes());
    for _ in 0..grid.num_nodes() {
        values.push(f64::from_le_bytes(read_array(&mut input)?));
    }
    Ok((grid, values))
}
