//! Binary snapshots of quarter-grid fields with JSON sidecars.
//!
//! Layout: 8-byte magic `BCFIELD1`, little-endian u32 grid parameter n, then
//! (n+1)^2 little-endian f64 node values in row-major order with i fastest,
//! matching `SymmetricField` storage. The sidecar lives next to the binary
//! at `<path>.json` and records the provenance a reader needs to interpret
//! the field (grid size, s, eps, kind, generating command line).
//!
//! Loading re-validates everything the class invariant demands: magic, a
//! grid size the rest of the crate accepts, exact length, finite values,
//! and a zero boundary ring.

use crate::error::{Error, Result};
use crate::grid::{QuarterGrid, SymmetricField};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 8] = b"BCFIELD1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Psi0,
    Barrier,
    Phi,
    Ratio,
    Other,
}

/// Provenance record stored beside every field file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub n: usize,
    pub s: Option<f64>,
    pub eps: Option<f64>,
    pub kind: FieldKind,
    /// Echo of the command line (or library call) that produced the field.
    pub generator: String,
}

/// The sidecar sits at `<path>.json` so the pair stays adjacent in listings.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

pub fn write_field(path: &Path, field: &SymmetricField, sidecar: &FieldSidecar) -> Result<()> {
    if sidecar.n != field.grid().n() {
        return Err(Error::InvalidParam(format!(
            "sidecar n = {} does not match the field grid n = {}",
            sidecar.n,
            field.grid().n()
        )));
    }
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&(field.grid().n() as u32).to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;

    let side = File::create(sidecar_path(path))?;
    serde_json::to_writer_pretty(BufWriter::new(side), sidecar)?;
    Ok(())
}

/// Load a field and, when present, its sidecar. A missing sidecar is not an
/// error (the binary is self-describing for geometry); a malformed or
/// mismatched one is.
pub fn read_field(path: &Path) -> Result<(SymmetricField, Option<FieldSidecar>)> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "{} is not a field file (bad magic)",
            path.display()
        )));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    let grid = QuarterGrid::new(n)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;

    let nn = grid.nodes();
    let mut values = Vec::with_capacity(nn * nn);
    let mut buf = vec![0u8; nn * 8];
    for _ in 0..nn {
        input.read_exact(&mut buf)?;
        for chunk in buf.chunks_exact(8) {
            let v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
            if !v.is_finite() {
                return Err(Error::Format(format!(
                    "{} contains a non-finite node value",
                    path.display()
                )));
            }
            values.push(v);
        }
    }
    let mut tail = [0u8; 1];
    if input.read(&mut tail)? != 0 {
        return Err(Error::Format(format!(
            "{} has trailing bytes beyond the declared grid",
            path.display()
        )));
    }
    let field = SymmetricField::from_values(grid, values)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;

    let side_path = sidecar_path(path);
    let sidecar = if side_path.exists() {
        let side: FieldSidecar = serde_json::from_reader(BufReader::new(File::open(&side_path)?))?;
        if side.n != n {
            return Err(Error::Format(format!(
                "sidecar {} declares n = {} but the binary carries n = {}",
                side_path.display(),
                side.n,
                n
            )));
        }
        Some(side)
    } else {
        None
    };
    Ok((field, sidecar))
}
