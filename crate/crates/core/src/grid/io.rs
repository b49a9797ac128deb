use super::{Box, GridSection, GridSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"GSEC";

#[derive(Serialize, Deserialize)]
struct JsonSection {
    lo: Vec<f64>,
    hi: Vec<f64>,
    counts: Vec<usize>,
    fiber: usize,
    values: Vec<f64>,
}

pub fn write_json<W: Write>(e: &GridSection, w: W) -> Result<()> {
    let js = JsonSection {
        lo: e.spec.domain.lo.clone(),
        hi: e.spec.domain.hi.clone(),
        counts: e.spec.counts.clone(),
        fiber: e.fiber,
        values: e.values.clone(),
    };
    serde_json::to_writer(w, &js)?;
    Ok(())
}

pub fn read_json<R: Read>(r: R) -> Result<GridSection> {
    let js: JsonSection = serde_json::from_reader(r)?;
    GridSection::new(GridSpec::new(Box::new(js.lo, js.hi)?, js.counts)?, js.fiber, js.values)
}

/// Little-endian layout: magic, u32 dim, dim×(f64 lo, f64 hi, u64 count), u64 fiber, values.
pub fn write_binary<W: Write>(e: &GridSection, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(e.dim() as u32).to_le_bytes())?;
    for ax in 0..e.dim() {
        w.write_all(&e.spec.domain.lo[ax].to_le_bytes())?;
        w.write_all(&e.spec.domain.hi[ax].to_le_bytes())?;
        w.write_all(&(e.spec.counts[ax] as u64).to_le_bytes())?;
    }
    w.write_all(&(e.fiber as u64).to_le_bytes())?;
    for v in &e.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridSection> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("not a grid section file".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    let (mut lo, mut hi, mut counts) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..dim {
        r.read_exact(&mut b8)?;
        lo.push(f64::from_le_bytes(b8));
        r.read_exact(&mut b8)?;
        hi.push(f64::from_le_bytes(b8));
        r.read_exact(&mut b8)?;
        counts.push(u64::from_le_bytes(b8) as usize);
    }
    r.read_exact(&mut b8)?;
    let fiber = u64::from_le_bytes(b8) as usize;
    let spec = GridSpec::new(Box::new(lo, hi)?, counts)?;
    let mut values = Vec::with_capacity(spec.len() * fiber);
    for _ in 0..spec.len() * fiber {
        r.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    GridSection::new(spec, fiber, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub k: usize,
    pub r: f64,
    pub norm: f64,
}

/// CSV with header `k,r,norm`.
pub fn write_norm_table<W: Write>(rows: &[NormRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in rows {
        wr.serialize(row)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridSection {
        let spec = GridSpec::new(Box::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap(), vec![5, 4]).unwrap();
        GridSection::from_fn(spec, 2, |x, o| {
            o[0] = x[0] * 0.1;
            o[1] = x[1].sin();
        })
    }

    #[test]
    fn json_roundtrip() {
        let e = sample();
        let mut buf = Vec::new();
        write_json(&e, &mut buf).unwrap();
        assert_eq!(read_json(buf.as_slice()).unwrap(), e);
    }

    #[test]
    fn binary_roundtrip() {
        let e = sample();
        let mut buf = Vec::new();
        write_binary(&e, &mut buf).unwrap();
        assert_eq!(read_binary(buf.as_slice()).unwrap(), e);
        assert!(read_binary(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn norm_table_header() {
        let mut buf = Vec::new();
        write_norm_table(&[NormRow { k: 2, r: 0.5, norm: 1.25 }], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,r,norm\n2,0.5,1.25\n");
    }
}
