//! BMLF binary field snapshots.
//!
//! Layout (all little-endian): magic `BMLF`, version `u32`, `n` as `u32`,
//! `L` as `f64`, time as `f64`, label length `u32` followed by ASCII bytes,
//! then `n*n` samples as `f64` in row-major order (x1 index outermost).

use std::io::{Read, Write};

use super::field::RealField;
use super::grid::Grid;
use crate::error::{BmlError, Result};

pub const MAGIC: &[u8; 4] = b"BMLF";
pub const VERSION: u32 = 1;

fn malformed(reason: impl Into<String>) -> BmlError {
    BmlError::Format {
        what: "BMLF snapshot",
        reason: reason.into(),
    }
}

pub fn write_snapshot(out: &mut impl Write, field: &RealField, time: f64) -> Result<()> {
    let label = field.label();
    if !label.is_ascii() {
        return Err(malformed(format!("label `{label}` is not ASCII")));
    }
    let mut buf = Vec::with_capacity(32 + label.len() + 8 * field.values().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(field.grid().n() as u32).to_le_bytes());
    buf.extend_from_slice(&field.grid().half_length().to_le_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    buf.extend_from_slice(&(label.len() as u32).to_le_bytes());
    buf.extend_from_slice(label.as_bytes());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn take<'a>(bytes: &mut &'a [u8], len: usize) -> Result<&'a [u8]> {
    if bytes.len() < len {
        return Err(malformed("truncated"));
    }
    let (head, tail) = bytes.split_at(len);
    *bytes = tail;
    Ok(head)
}

fn u32_le(bytes: &mut &[u8]) -> Result<u32> {
    Ok(u32::from_le_bytes(take(bytes, 4)?.try_into().unwrap()))
}

fn f64_le(bytes: &mut &[u8]) -> Result<f64> {
    Ok(f64::from_le_bytes(take(bytes, 8)?.try_into().unwrap()))
}

/// Returns the field and its time stamp.
pub fn read_snapshot(input: &mut impl Read) -> Result<(RealField, f64)> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let mut bytes = data.as_slice();
    if take(&mut bytes, 4)? != MAGIC {
        return Err(malformed("bad magic"));
    }
    let version = u32_le(&mut bytes)?;
    if version != VERSION {
        return Err(malformed(format!("unsupported version {version}")));
    }
    let n = u32_le(&mut bytes)? as usize;
    let half_length = f64_le(&mut bytes)?;
    let time = f64_le(&mut bytes)?;
    let label_len = u32_le(&mut bytes)? as usize;
    let label = take(&mut bytes, label_len)?;
    if !label.is_ascii() {
        return Err(malformed("label is not ASCII"));
    }
    let label = String::from_utf8(label.to_vec()).map_err(|e| malformed(e.to_string()))?;
    let grid = Grid::new(n, half_length)?;
    if bytes.len() != 8 * grid.len() {
        return Err(malformed(format!(
            "expected {} sample bytes, found {}",
            8 * grid.len(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((RealField::new(grid, values, label)?, time))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(8, 1.25).unwrap();
        let f = RealField::from_fn(g, "theta", |x, y| x.exp() * y.sin() - 1e-300);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, 0.375).unwrap();
        assert_eq!(&buf[..4], b"BMLF");
        assert_eq!(buf.len(), 4 + 4 + 4 + 8 + 8 + 4 + 5 + 8 * 64);
        let (back, t) = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(t, 0.375);
        assert_eq!(back.label(), "theta");
        assert_eq!(back.grid(), f.grid());
        for (a, b) in back.values().iter().zip(f.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_truncation_and_magic() {
        let g = Grid::new(8, 1.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &RealField::zeros(g, "z"), 0.0).unwrap();
        assert!(read_snapshot(&mut &buf[..buf.len() - 1]).is_err());
        buf[0] = b'X';
        assert!(read_snapshot(&mut buf.as_slice()).is_err());
    }
}
