//! Binary model container, all integers and floats little-endian:
//!
//! ```text
//! magic   8 bytes  "LCAEMODL"
//! version u32      1
//! n h1 h2 c        4 × u64
//! mean             n × f64
//! scale            n × f64
//! W1 W2 W2p W1p D  each: rows u64, cols u64, rows·cols f64 column-major
//! ```
//!
//! `W1` is `h1 × (n+1)`; its last column multiplies the constant bias input.

use std::path::Path;

use lcae_core::{LayerSizes, LcaeModel, Mat, NormStats};

use crate::error::{format_err, io_err, Result};

pub const MAGIC: &[u8; 8] = b"LCAEMODL";
pub const VERSION: u32 = 1;

pub fn encode_model(model: &LcaeModel) -> Vec<u8> {
    let s = model.sizes();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [s.n, s.h1, s.h2, s.c] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    let norm = model.norm_stats();
    for v in norm.mean.iter().chain(&norm.scale) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for m in [model.w1(), model.w2(), model.w2p(), model.w1p(), model.d()] {
        out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
        for v in m.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn save_model(path: &Path, model: &LcaeModel) -> Result<()> {
    std::fs::write(path, encode_model(model)).map_err(io_err(path))
}

pub fn load_model(path: &Path) -> Result<LcaeModel> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode_model(path, &bytes)
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.bytes.len() - self.at < n {
            return Err(format_err(self.path, "model file is truncated"));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn size(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v)
            .ok()
            .filter(|&v| v <= self.bytes.len())
            .ok_or_else(|| format_err(self.path, format!("implausible dimension {v}")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| format_err(self.path, "size overflow"))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn mat(&mut self) -> Result<Mat> {
        let rows = self.size()?;
        let cols = self.size()?;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| format_err(self.path, "size overflow"))?;
        Ok(Mat::from_col_major(rows, cols, self.f64s(n)?)?)
    }
}

pub fn decode_model(path: &Path, bytes: &[u8]) -> Result<LcaeModel> {
    let mut cur = Cursor { path, bytes, at: 0 };
    if cur.take(8)? != MAGIC {
        return Err(format_err(path, "not a model file (bad magic)"));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(format_err(
            path,
            format!("unsupported model version {version}"),
        ));
    }
    let sizes = LayerSizes::new(cur.size()?, cur.size()?, cur.size()?, cur.size()?)?;
    let mean = cur.f64s(sizes.n)?;
    let scale = cur.f64s(sizes.n)?;
    let w1 = cur.mat()?;
    let w2 = cur.mat()?;
    let w2p = cur.mat()?;
    let w1p = cur.mat()?;
    let d = cur.mat()?;
    if cur.at != bytes.len() {
        return Err(format_err(
            path,
            "trailing bytes after the last weight matrix",
        ));
    }
    Ok(LcaeModel::from_parts(
        sizes,
        w1,
        w2,
        w2p,
        w1p,
        d,
        NormStats { mean, scale },
    )?)
}
