//! Binary cache for Floquet operators and their spectra.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "KPDUMP\0\0"
//! 8       4     u32 format version (1)
//! 12      4     u32 payload kind: 0 = operator, 1 = spectrum
//! 16      4     u32 p
//! 20      8     f64 k
//! 28      8     f64 alpha (radians, in [0, 2pi))
//! 36      4     u32 N_s
//! 40      8     u64 rows
//! 48      8     u64 cols
//! 56      ...   spectrum only: `cols` f64 eigenphases
//!         ...   rows * cols complex entries, row-major, each (re f64, im f64)
//! end-32  32    sha256 of every preceding byte
//! ```
//!
//! An operator dump stores `U` in the `Jz` basis. A spectrum dump stores the
//! eigenphases and the eigenvector matrix, one eigenvector per column.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::floquet::{FloquetOperator, SpectralData, SpinRepresentation};
use crate::scan::{sha256, write_atomic, Reader};
use crate::{Error, ModelParams, Result};

pub const DUMP_MAGIC: [u8; 8] = *b"KPDUMP\0\0";
pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpKind {
    Operator = 0,
    Spectrum = 1,
}

/// Decoded contents of a dump file.
#[derive(Debug, Clone, PartialEq)]
pub enum Dump {
    Operator(FloquetOperator),
    Spectrum { params: ModelParams, rep: SpinRepresentation, data: SpectralData },
}

impl Dump {
    pub fn kind(&self) -> DumpKind {
        match self {
            Dump::Operator(_) => DumpKind::Operator,
            Dump::Spectrum { .. } => DumpKind::Spectrum,
        }
    }
}

fn header(kind: DumpKind, params: &ModelParams, rep: SpinRepresentation, shape: (usize, usize)) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&DUMP_MAGIC);
    buf.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    buf.extend_from_slice(&(kind as u32).to_le_bytes());
    buf.extend_from_slice(&params.p().to_le_bytes());
    buf.extend_from_slice(&params.k().to_le_bytes());
    buf.extend_from_slice(&params.alpha().to_le_bytes());
    buf.extend_from_slice(&rep.n_spins().to_le_bytes());
    buf.extend_from_slice(&(shape.0 as u64).to_le_bytes());
    buf.extend_from_slice(&(shape.1 as u64).to_le_bytes());
    buf
}

fn push_matrix(buf: &mut Vec<u8>, m: &Array2<Complex64>) {
    for z in m.iter() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
}

fn finish(path: &Path, mut buf: Vec<u8>) -> Result<()> {
    let checksum = sha256(&buf);
    buf.extend_from_slice(&checksum);
    write_atomic(path, &buf)
}

pub fn write_operator(op: &FloquetOperator, path: &Path) -> Result<()> {
    let mut buf = header(DumpKind::Operator, &op.params, op.rep, op.matrix.dim());
    push_matrix(&mut buf, &op.matrix);
    finish(path, buf)
}

pub fn write_spectrum(
    params: &ModelParams,
    rep: SpinRepresentation,
    data: &SpectralData,
    path: &Path,
) -> Result<()> {
    if data.phases.len() != data.vectors.ncols() {
        return Err(Error::InvalidParameter("phase count does not match eigenvector count".into()));
    }
    let mut buf = header(DumpKind::Spectrum, params, rep, data.vectors.dim());
    for ph in &data.phases {
        buf.extend_from_slice(&ph.to_le_bytes());
    }
    push_matrix(&mut buf, &data.vectors);
    finish(path, buf)
}

/// Reads and verifies any dump file.
pub fn read(path: &Path) -> Result<Dump> {
    let bytes = fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if r.take(8, "magic")? != DUMP_MAGIC {
        return Err(Error::Corrupt("not a dump file (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != DUMP_VERSION {
        return Err(Error::VersionMismatch { found: version, expected: DUMP_VERSION });
    }
    if bytes.len() < r.pos + 32 {
        return Err(Error::Corrupt("truncated file".into()));
    }
    let (body, stored) = bytes.split_at(bytes.len() - 32);
    if sha256(body) != stored {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }
    let mut r = Reader { bytes: body, pos: r.pos };
    let kind = match r.u32("kind")? {
        0 => DumpKind::Operator,
        1 => DumpKind::Spectrum,
        other => return Err(Error::Corrupt(format!("unknown payload kind {other}"))),
    };
    let p = r.u32("p")?;
    let k = r.f64("k")?;
    let alpha = r.f64("alpha")?;
    let params = ModelParams::new(p, k, alpha).map_err(|e| Error::Corrupt(e.to_string()))?;
    let rep = SpinRepresentation::new(r.u32("N_s")?).map_err(|e| Error::Corrupt(e.to_string()))?;
    let rows = r.u64("rows")? as usize;
    let cols = r.u64("cols")? as usize;
    if rows != rep.dim() || cols != rep.dim() {
        return Err(Error::Corrupt(format!("shape {rows}x{cols} does not match N_s")));
    }
    let phases = match kind {
        DumpKind::Spectrum => Some(
            r.take(8 * cols, "phases")?
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect::<Vec<f64>>(),
        ),
        DumpKind::Operator => None,
    };
    let entries: Vec<Complex64> = r
        .take(16 * rows * cols, "matrix")?
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    if r.pos != body.len() {
        return Err(Error::Corrupt("trailing bytes".into()));
    }
    let matrix = Array2::from_shape_vec((rows, cols), entries).expect("length checked");
    Ok(match phases {
        Some(phases) => Dump::Spectrum { params, rep, data: SpectralData { phases, vectors: matrix } },
        None => Dump::Operator(FloquetOperator { matrix, params, rep }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{eigensystem, floquet_operator};

    #[test]
    fn operator_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.bin");
        let params = ModelParams::new(3, 1.7, 0.9).unwrap();
        let op = floquet_operator(&params, SpinRepresentation::new(6).unwrap()).unwrap();
        write_operator(&op, &path).unwrap();
        assert_eq!(read(&path).unwrap(), Dump::Operator(op));
    }

    #[test]
    fn spectrum_roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let params = ModelParams::new(2, 2.5, 1.2).unwrap();
        let rep = SpinRepresentation::new(5).unwrap();
        let data = eigensystem(&floquet_operator(&params, rep).unwrap().matrix).unwrap();
        write_spectrum(&params, rep, &data, &path).unwrap();
        let back = read(&path).unwrap();
        assert_eq!(back.kind(), DumpKind::Spectrum);
        assert_eq!(back, Dump::Spectrum { params, rep, data });

        let mut bytes = fs::read(&path).unwrap();
        bytes[60] ^= 1;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read(&path), Err(Error::Corrupt(_))));
    }
}
