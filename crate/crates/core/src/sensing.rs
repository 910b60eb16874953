//! Sparse binary sensing operator: `d` ones per column, everything else zero.

use alloc::vec::Vec;

use crate::error::{dim_err, invalid, Error, Result};
use crate::numkit::{shape_str, Mat};
use crate::rng::SeededRng;

/// Default number of ones per column.
pub const DEFAULT_ONES_PER_COL: usize = 2;
const MAX_ATTEMPTS: usize = 100;

/// Compression operator Φ (m×n), stored as the sorted row indices of the ones
/// in every column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SensingMatrix {
    m: usize,
    n: usize,
    d: usize,
    seed: u64,
    rows: Vec<u32>, // n * d, column-major
}

impl SensingMatrix {
    /// Draws a matrix with `d` distinct ones per column, each column's rows
    /// chosen uniformly without replacement from a ChaCha8 stream seeded with
    /// `seed`. Redraws (continuing the same stream) while any row is all-zero,
    /// unless `d·n < m` makes that unavoidable.
    pub fn generate(m: usize, n: usize, d: usize, seed: u64) -> Result<Self> {
        if d == 0 || d > m || m > n {
            return Err(invalid(alloc::format!(
                "sensing parameters need 1 <= d <= m <= n (got m={m}, n={n}, d={d})"
            )));
        }
        if m > u32::MAX as usize {
            return Err(invalid("sensing: m too large"));
        }
        let mut rng = SeededRng::new(seed);
        let check_rows = d * n >= m;
        let mut pool: Vec<u32> = (0..m as u32).collect();
        for _ in 0..MAX_ATTEMPTS {
            let mut rows = Vec::with_capacity(n * d);
            for _ in 0..n {
                // partial Fisher-Yates over a fresh 0..m pool
                for (i, p) in pool.iter_mut().enumerate() {
                    *p = i as u32;
                }
                for k in 0..d {
                    let j = k + rng.below((m - k) as u64) as usize;
                    pool.swap(k, j);
                }
                let mut picked: Vec<u32> = pool[..d].to_vec();
                picked.sort_unstable();
                rows.extend_from_slice(&picked);
            }
            let candidate = Self {
                m,
                n,
                d,
                seed,
                rows,
            };
            if !check_rows || candidate.row_counts().iter().all(|&c| c > 0) {
                return Ok(candidate);
            }
        }
        Err(Error::GenerationFailed {
            attempts: MAX_ATTEMPTS,
        })
    }

    /// The n×n identity (m = n, d = 1); seed 0.
    pub fn identity(n: usize) -> Self {
        Self {
            m: n,
            n,
            d: 1,
            seed: 0,
            rows: (0..n as u32).collect(),
        }
    }

    /// Rebuilds from explicit per-column row indices (used by file loaders).
    pub fn from_parts(
        m: usize,
        n: usize,
        d: usize,
        seed: u64,
        columns: &[Vec<u32>],
    ) -> Result<Self> {
        if d == 0 || d > m || m > n {
            return Err(invalid(alloc::format!(
                "sensing parameters need 1 <= d <= m <= n (got m={m}, n={n}, d={d})"
            )));
        }
        if columns.len() != n {
            return Err(dim_err(
                "SensingMatrix::from_parts",
                alloc::format!("{n} columns"),
                columns.len(),
            ));
        }
        let mut rows = Vec::with_capacity(n * d);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != d {
                return Err(invalid(alloc::format!(
                    "column {j}: expected {d} row indices, found {}",
                    col.len()
                )));
            }
            let mut c = col.clone();
            c.sort_unstable();
            if c.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(alloc::format!("column {j}: repeated row index")));
            }
            if c.iter().any(|&r| r as usize >= m) {
                return Err(invalid(alloc::format!(
                    "column {j}: row index out of range 0..{m}"
                )));
            }
            rows.extend_from_slice(&c);
        }
        Ok(Self {
            m,
            n,
            d,
            seed,
            rows,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ones_per_col(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row indices of the ones in column `j`, ascending.
    pub fn column(&self, j: usize) -> &[u32] {
        &self.rows[j * self.d..(j + 1) * self.d]
    }

    /// Number of ones in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.m];
        for &r in &self.rows {
            counts[r as usize] += 1;
        }
        counts
    }

    pub fn to_dense(&self) -> Mat {
        let mut out = Mat::zeros(self.m, self.n);
        for j in 0..self.n {
            for &r in self.column(j) {
                out.set(r as usize, j, 1.0);
            }
        }
        out
    }

    /// `Φ Z`: compresses every column of `z` (n×N) to length m.
    pub fn compress(&self, z: &Mat) -> Result<Mat> {
        if z.rows() != self.n {
            return Err(dim_err(
                "compress",
                alloc::format!("{} rows", self.n),
                shape_str(z),
            ));
        }
        let mut out = Mat::zeros(self.m, z.cols());
        for c in 0..z.cols() {
            let src = z.col(c);
            let dst = out.col_mut(c);
            for (j, &v) in src.iter().enumerate() {
                for &r in &self.rows[j * self.d..(j + 1) * self.d] {
                    dst[r as usize] += v;
                }
            }
        }
        Ok(out)
    }

    /// `Φᵀ B`: the adjoint, mapping compressed columns back to length n.
    pub fn adjoint(&self, b: &Mat) -> Result<Mat> {
        if b.rows() != self.m {
            return Err(dim_err(
                "poor_mans_inverse",
                alloc::format!("{} rows", self.m),
                shape_str(b),
            ));
        }
        let mut out = Mat::zeros(self.n, b.cols());
        for c in 0..b.cols() {
            let src = b.col(c);
            let dst = out.col_mut(c);
            for (j, d) in dst.iter_mut().enumerate() {
                *d = self.rows[j * self.d..(j + 1) * self.d]
                    .iter()
                    .map(|&r| src[r as usize])
                    .sum();
            }
        }
        Ok(out)
    }
}

/// `Φᵀ B`, the cheap linear estimate fed to the autoencoder.
pub fn poor_mans_inverse(phi: &SensingMatrix, b: &Mat) -> Result<Mat> {
    phi.adjoint(b)
}

/// `Φ Z`.
pub fn compress(phi: &SensingMatrix, z: &Mat) -> Result<Mat> {
    phi.compress(z)
}
