//! Binary matrix dump: one JSON header line, then little-endian f64 pairs
//! (re, im) in row-major order.

use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::space::{CMatrix, SectoredMap};
use super::{TensorError, TensorResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub rows: usize,
    pub cols: usize,
    /// Sector layout per input factor: (value, dim).
    pub in_sectors: Vec<Vec<(String, usize)>>,
    pub out_sectors: Vec<Vec<(String, usize)>>,
    pub anc_in: usize,
    pub anc_out: usize,
}

impl DumpHeader {
    pub fn of(m: &SectoredMap) -> Self {
        let layout = |p: &super::ProductSpace| p.factors.iter().map(|f| f.sectors.clone()).collect();
        Self {
            rows: m.matrix.nrows(),
            cols: m.matrix.ncols(),
            in_sectors: layout(&m.in_space),
            out_sectors: layout(&m.out_space),
            anc_in: m.anc_in,
            anc_out: m.anc_out,
        }
    }
}

pub fn write_dump<W: Write>(w: &mut W, m: &SectoredMap) -> TensorResult<()> {
    let header = serde_json::to_string(&DumpHeader::of(m)).map_err(|e| TensorError::Format(e.to_string()))?;
    writeln!(w, "{header}")?;
    let mut buf = Vec::with_capacity(m.matrix.len() * 16);
    for r in 0..m.matrix.nrows() {
        for c in 0..m.matrix.ncols() {
            let x = m.matrix[(r, c)];
            buf.extend_from_slice(&x.re.to_le_bytes());
            buf.extend_from_slice(&x.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_dump<R: BufRead>(r: &mut R) -> TensorResult<(DumpHeader, CMatrix)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let h: DumpHeader = serde_json::from_str(line.trim_end()).map_err(|e| TensorError::Format(e.to_string()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != h.rows * h.cols * 16 {
        return Err(TensorError::Format(format!(
            "expected {} payload bytes, found {}",
            h.rows * h.cols * 16,
            bytes.len()
        )));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[k * 8..k * 8 + 8].try_into().unwrap());
    let m = CMatrix::from_fn(h.rows, h.cols, |i, j| {
        let k = 2 * (i * h.cols + j);
        C64::new(f(k), f(k + 1))
    });
    Ok((h, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::tensor::random_fleshing;
    use std::collections::BTreeMap;

    #[test]
    fn round_trip() {
        let g = catalog::switch(2).graph;
        let f = random_fleshing(&g, 3, &BTreeMap::new()).unwrap();
        let m = &f.maps[1];
        let mut buf = Vec::new();
        write_dump(&mut buf, m).unwrap();
        let (h, back) = read_dump(&mut buf.as_slice()).unwrap();
        assert_eq!(h, DumpHeader::of(m));
        assert_eq!(back, m.matrix);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let g = catalog::identity(2).graph;
        let f = random_fleshing(&g, 3, &BTreeMap::new()).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, &f.maps[0]).unwrap();
        buf.pop();
        assert!(matches!(read_dump(&mut buf.as_slice()), Err(TensorError::Format(_))));
    }
}
