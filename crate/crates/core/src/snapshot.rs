//! Field snapshots: a one-line JSON header `{"n":..,"L":..,"N":..}` followed by
//! the real-space samples in storage order.
//!
//! The binary form stores little-endian `f64` and round-trips bit-exactly. The
//! CSV form prefixes the header with `# ` and writes one sample per line using
//! the shortest representation that parses back to the same `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    #[default]
    Binary,
    Csv,
}

impl SnapshotFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SnapshotFormat::Binary => "bin",
            SnapshotFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

impl From<&Grid> for SnapshotHeader {
    fn from(g: &Grid) -> Self {
        Self {
            n: g.dim(),
            length: g.length(),
            points: g.points(),
        }
    }
}

pub fn write_snapshot<W: Write>(out: W, field: &SpectralField, format: SnapshotFormat) -> Result<()> {
    let mut out = BufWriter::new(out);
    let header = serde_json::to_string(&SnapshotHeader::from(field.grid()))?;
    let values = field.real_values();
    match format {
        SnapshotFormat::Binary => {
            writeln!(out, "{header}")?;
            for v in values.iter() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        SnapshotFormat::Csv => {
            writeln!(out, "# {header}")?;
            for v in values.iter() {
                writeln!(out, "{v:?}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads either form; the format is recognized from the header line.
pub fn read_snapshot<R: Read>(input: R) -> Result<SpectralField> {
    let mut input = BufReader::new(input);
    let mut line = String::new();
    input.read_line(&mut line)?;
    let (csv, json) = match line.trim_end().strip_prefix("# ") {
        Some(rest) => (true, rest.to_string()),
        None => (false, line.trim_end().to_string()),
    };
    let header: SnapshotHeader = serde_json::from_str(&json)
        .map_err(|e| Error::Snapshot(format!("bad header: {e}")))?;
    let grid = Grid::new(header.n, header.length, header.points)?;
    let mut values = Vec::with_capacity(grid.len());
    if csv {
        for (lineno, row) in input.lines().enumerate() {
            let row = row?;
            let row = row.trim();
            if row.is_empty() {
                continue;
            }
            let v: f64 = row
                .parse()
                .map_err(|_| Error::Snapshot(format!("line {}: not a number: {row:?}", lineno + 2)))?;
            values.push(v);
        }
    } else {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * grid.len() {
            return Err(Error::Snapshot(format!(
                "expected {} payload bytes, found {}",
                8 * grid.len(),
                bytes.len()
            )));
        }
        values.extend(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))),
        );
    }
    SpectralField::from_real(grid, values)
}

pub fn save_snapshot(path: &Path, field: &SpectralField, format: SnapshotFormat) -> Result<()> {
    write_snapshot(File::create(path)?, field, format)
}

pub fn load_snapshot(path: &Path) -> Result<SpectralField> {
    read_snapshot(File::open(path)?)
}
