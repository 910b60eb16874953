//! The two-layer label-consistent autoencoder and its forward passes.
//!
//! Encoder: `Z² = σ(W2 · σ(W1 · [x; 1]))`. A constant-one feature is
//! appended to every input window, so `W1` is `h1 × (n+1)`; no other layer
//! has a bias. Decoder: `x̂ = W1p · σ(W2p · Z²)` with a linear output.
//! Labels: `scores = D · Z²`.

use alloc::vec::Vec;

use crate::error::{dim_err, invalid, Error, Result};
use crate::numkit::{shape_str, sigmoid, Mat};
use crate::sensing::SensingMatrix;
use crate::signal::NormStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSizes {
    pub n: usize,
    pub h1: usize,
    pub h2: usize,
    pub c: usize,
}

impl LayerSizes {
    pub fn new(n: usize, h1: usize, h2: usize, c: usize) -> Result<Self> {
        let s = Self { n, h1, h2, c };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.h1 == 0 || self.h2 == 0 || self.c == 0 {
            return Err(invalid("layer sizes must all be >= 1"));
        }
        Ok(())
    }

    pub(crate) fn w1_shape(&self) -> (usize, usize) {
        (self.h1, self.n + 1)
    }
    pub(crate) fn w2_shape(&self) -> (usize, usize) {
        (self.h2, self.h1)
    }
    pub(crate) fn w2p_shape(&self) -> (usize, usize) {
        (self.h1, self.h2)
    }
    pub(crate) fn w1p_shape(&self) -> (usize, usize) {
        (self.n, self.h1)
    }
    pub(crate) fn d_shape(&self) -> (usize, usize) {
        (self.c, self.h2)
    }
}

/// Trained weights plus the input normalizer. Immutable once built, so
/// forward passes may run concurrently.
#[derive(Clone, Debug, PartialEq)]
pub struct LcaeModel {
    sizes: LayerSizes,
    pub(crate) w1: Mat,
    pub(crate) w2: Mat,
    pub(crate) w2p: Mat,
    pub(crate) w1p: Mat,
    pub(crate) d: Mat,
    norm: NormStats,
}

impl LcaeModel {
    /// Checks every shape against `sizes` and that all weights are finite.
    pub fn from_parts(
        sizes: LayerSizes,
        w1: Mat,
        w2: Mat,
        w2p: Mat,
        w1p: Mat,
        d: Mat,
        norm: NormStats,
    ) -> Result<Self> {
        sizes.validate()?;
        let checks = [
            ("W1", &w1, sizes.w1_shape()),
            ("W2", &w2, sizes.w2_shape()),
            ("W2p", &w2p, sizes.w2p_shape()),
            ("W1p", &w1p, sizes.w1p_shape()),
            ("D", &d, sizes.d_shape()),
        ];
        for (name, m, (r, c)) in checks {
            if m.shape() != (r, c) {
                return Err(dim_err(name, alloc::format!("{r}x{c}"), shape_str(m)));
            }
            if !m.all_finite() {
                return Err(invalid(alloc::format!("{name} contains non-finite values")));
            }
        }
        norm.validate()?;
        if norm.dim() != sizes.n {
            return Err(dim_err("LcaeModel norm stats", sizes.n, norm.dim()));
        }
        Ok(Self {
            sizes,
            w1,
            w2,
            w2p,
            w1p,
            d,
            norm,
        })
    }

    /// All weights zero, identity normalizer.
    pub fn zeros(sizes: LayerSizes) -> Result<Self> {
        let z = |(r, c): (usize, usize)| Mat::zeros(r, c);
        Self::from_parts(
            sizes,
            z(sizes.w1_shape()),
            z(sizes.w2_shape()),
            z(sizes.w2p_shape()),
            z(sizes.w1p_shape()),
            z(sizes.d_shape()),
            NormStats::identity(sizes.n),
        )
    }

    pub fn sizes(&self) -> LayerSizes {
        self.sizes
    }
    /// `h1 × (n+1)`; the last column multiplies the bias feature.
    pub fn w1(&self) -> &Mat {
        &self.w1
    }
    pub fn w2(&self) -> &Mat {
        &self.w2
    }
    pub fn w2p(&self) -> &Mat {
        &self.w2p
    }
    pub fn w1p(&self) -> &Mat {
        &self.w1p
    }
    pub fn d(&self) -> &Mat {
        &self.d
    }
    pub fn norm_stats(&self) -> &NormStats {
        &self.norm
    }

    #[cfg(test)]
    pub(crate) fn set_norm(&mut self, norm: NormStats) {
        self.norm = norm;
    }

    /// `σ(W1 · [x; 1])` for normalized inputs.
    pub fn first_layer(&self, xin: &Mat) -> Result<Mat> {
        self.check_rows(xin, self.sizes.n, "encode")?;
        Ok(sigmoid(&self.w1.matmul(&xin.with_ones_row())?))
    }

    /// Innermost code `Z²` for normalized inputs; entries lie in (0, 1).
    pub fn encode(&self, xin: &Mat) -> Result<Mat> {
        let z = self.first_layer(xin)?;
        Ok(sigmoid(&self.w2.matmul(&z)?))
    }

    /// Normalized reconstruction from an innermost code.
    pub fn decode(&self, z2: &Mat) -> Result<Mat> {
        self.check_rows(z2, self.sizes.h2, "decode")?;
        self.w1p.matmul(&sigmoid(&self.w2p.matmul(z2)?))
    }

    /// Measurements to signal-domain windows: poor man's inverse, normalize,
    /// encode, decode, denormalize. A fixed number of products, no iteration.
    pub fn reconstruct(&self, phi: &SensingMatrix, b: &Mat) -> Result<Mat> {
        if phi.n() != self.sizes.n {
            return Err(dim_err(
                "reconstruct",
                alloc::format!("phi.n = {}", self.sizes.n),
                phi.n(),
            ));
        }
        let xt = self.norm.apply(&phi.adjoint(b)?)?;
        self.norm.invert(&self.decode(&self.encode(&xt)?)?)
    }

    /// `D · encode(x)` for normalized inputs.
    pub fn predict_scores(&self, xin: &Mat) -> Result<ClassScores> {
        Ok(ClassScores {
            scores: self.d.matmul(&self.encode(xin)?)?,
        })
    }

    fn check_rows(&self, m: &Mat, rows: usize, op: &'static str) -> Result<()> {
        if m.rows() != rows {
            return Err(dim_err(op, alloc::format!("{rows} rows"), shape_str(m)));
        }
        Ok(())
    }
}

/// Label activations, one column per window. Real valued, not one-hot.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassScores {
    pub scores: Mat,
}

impl ClassScores {
    pub fn classes(&self) -> usize {
        self.scores.rows()
    }

    pub fn windows(&self) -> usize {
        self.scores.cols()
    }
}

/// Class whose row mean over all windows is largest; ties go to the lowest
/// index.
pub fn classify_sequence(scores: &ClassScores) -> Result<usize> {
    let s = &scores.scores;
    if s.cols() == 0 || s.rows() == 0 {
        return Err(Error::Empty("classify_sequence needs at least one window"));
    }
    let means: Vec<f64> = (0..s.rows())
        .map(|r| s.row(r).iter().sum::<f64>() / s.cols() as f64)
        .collect();
    Ok(argmax(&means))
}

/// Per-window argmax with the same tie rule.
pub fn classify_windows(scores: &ClassScores) -> Vec<usize> {
    (0..scores.windows())
        .map(|c| argmax(scores.scores.col(c)))
        .collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
