//! Binary field files (`KSF1` format).
//!
//! Layout: the 4 magic bytes `KSF1`, a little-endian `u32` header length, a
//! JSON header `{"blocks": [...], "box": [...], "domain": "space"|"freq",
//! "shape": [...]}` (keys sorted), then the samples as interleaved
//! little-endian `f64` pairs (re, im) in row-major order.  Round trips are
//! bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};
use crate::grid::{make_grid, Domain, SampledField};

const MAGIC: &[u8; 4] = b"KSF1";

#[derive(Serialize, Deserialize)]
struct Header {
    blocks: Vec<usize>,
    #[serde(rename = "box")]
    box_lengths: Vec<f64>,
    domain: String,
    shape: Vec<usize>,
}

/// Writes a field to a `KSF1` file.
pub fn field_write(u: &SampledField, path: &Path) -> Result<()> {
    let header = Header {
        blocks: u.grid.block_dims().to_vec(),
        box_lengths: u.grid.box_lengths().to_vec(),
        domain: match u.domain {
            Domain::Space => "space".into(),
            Domain::Freq => "freq".into(),
        },
        shape: u.grid.samples().to_vec(),
    };
    let header_bytes = serde_json::to_vec(&header)
        .map_err(|e| KsError::Format(format!("header serialization failed: {e}")))?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    for v in &u.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field from a `KSF1` file, validating magic, header and payload
/// length.
pub fn field_read(path: &Path) -> Result<SampledField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(KsError::Format(format!(
            "{} is not a KSF1 field file (bad magic)",
            path.display()
        )));
    }
    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)?;
    let header_len = u32::from_le_bytes(len_bytes) as usize;
    if header_len > 1 << 20 {
        return Err(KsError::Format("unreasonably large header".into()));
    }
    let mut header_bytes = vec![0u8; header_len];
    r.read_exact(&mut header_bytes)?;
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| KsError::Format(format!("malformed header: {e}")))?;
    let domain = match header.domain.as_str() {
        "space" => Domain::Space,
        "freq" => Domain::Freq,
        other => return Err(KsError::Format(format!("unknown domain `{other}`"))),
    };
    let grid = make_grid(&header.blocks, &header.shape, &header.box_lengths)?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != grid.len() * 16 {
        return Err(KsError::Format(format!(
            "payload has {} bytes, expected {} for shape {:?}",
            payload.len(),
            grid.len() * 16,
            header.shape
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for chunk in payload.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        values.push(Complex64::new(re, im));
    }
    SampledField::new(grid, domain, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = make_grid(&[1, 1], &[8, 4], &[2.0, 1.5]).unwrap();
        let u = sample(&g, |x| Complex64::new(x[0] * 0.1 + 1.0 / 3.0, x[1].sin()));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.ksf");
        field_write(&u, &path).unwrap();
        let back = field_read(&path).unwrap();
        assert_eq!(u.grid, back.grid);
        assert_eq!(u.domain, back.domain);
        for (a, b) in u.values.iter().zip(&back.values) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.ksf");
        std::fs::write(&path, b"NOPE0000").unwrap();
        assert!(matches!(field_read(&path), Err(KsError::Format(_))));
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let g = make_grid(&[1], &[8], &[2.0]).unwrap();
        let u = sample(&g, |x| Complex64::new(x[0], 0.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.ksf");
        field_write(&u, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(field_read(&path), Err(KsError::Format(_))));
    }
}
