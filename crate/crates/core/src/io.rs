//! Binary container for sampled functions and CSV helpers.
//!
//! Container layout: magic `SMPF`, a little-endian `u32` header length, a
//! JSON header `{"d", "h", "R", "n", "dtype": "complex128"}`, then the
//! row-major payload as little-endian `(re, im)` pairs of `f64`.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampledFunction;

const MAGIC: &[u8; 4] = b"SMPF";

/// Decimal rendering with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    d: usize,
    h: f64,
    #[serde(rename = "R")]
    r: f64,
    n: usize,
    dtype: String,
}

pub fn write_sampled<W: Write>(f: &SampledFunction, mut out: W) -> Result<()> {
    let header = serde_json::to_vec(&Header { d: f.d, h: f.h, r: f.r, n: f.n, dtype: "complex128".into() })?;
    out.write_all(MAGIC)?;
    out.write_all(&(header.len() as u32).to_le_bytes())?;
    out.write_all(&header)?;
    let mut payload = Vec::with_capacity(16 * f.values.len());
    for v in &f.values {
        payload.extend_from_slice(&v.re.to_le_bytes());
        payload.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&payload)?;
    Ok(())
}

pub fn read_sampled<R: Read>(mut input: R) -> Result<SampledFunction> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut header = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut header)?;
    let header: Header = serde_json::from_slice(&header)?;
    if header.dtype != "complex128" {
        return Err(Error::Format(format!("unsupported dtype {}", header.dtype)));
    }
    let count = header.n.checked_pow(header.d as u32).ok_or_else(|| Error::Format("size overflow".into()))?;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    if payload.len() != 16 * count {
        return Err(Error::Format(format!("payload has {} bytes, expected {}", payload.len(), 16 * count)));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    let f = SampledFunction::new(header.d, header.h, header.r, values)?;
    if f.n != header.n {
        return Err(Error::Format("header node count disagrees with h and R".into()));
    }
    Ok(f)
}

pub fn save_sampled(f: &SampledFunction, path: &Path) -> Result<()> {
    write_sampled(f, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn load_sampled(path: &Path) -> Result<SampledFunction> {
    read_sampled(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Columns `x,re,im,abs` of a one-dimensional function.
pub fn slice_csv(f: &SampledFunction) -> Result<String> {
    if f.d != 1 {
        return Err(Error::InvalidParameter("CSV slices are one-dimensional".into()));
    }
    let mut out = String::from("x,re,im,abs\n");
    for (j, v) in f.values.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", fmt17(f.coord(j)), fmt17(v.re), fmt17(v.im), fmt17(v.norm())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SampledFunction {
        SampledFunction::from_fn(1, 0.25, 2.0, |x| Complex64::new(x[0], -x[0] * x[0])).unwrap()
    }

    #[test]
    fn container_roundtrip() {
        let f = sample();
        let mut buf = Vec::new();
        write_sampled(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"SMPF");
        assert_eq!(read_sampled(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn container_rejects_truncated_payload() {
        let mut buf = Vec::new();
        write_sampled(&sample(), &mut buf).unwrap();
        buf.pop();
        assert!(matches!(read_sampled(buf.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_sampled(&b"XXXX"[..]), Err(Error::Format(_))));
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.smpf");
        save_sampled(&sample(), &path).unwrap();
        assert_eq!(load_sampled(&path).unwrap(), sample());
    }

    #[test]
    fn csv_slice() {
        let csv = slice_csv(&sample()).unwrap();
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.lines().nth(1).unwrap().starts_with("-2.0000000000000000e0,"));
    }

    #[test]
    fn fmt17_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(f64::INFINITY), "inf");
    }
}
