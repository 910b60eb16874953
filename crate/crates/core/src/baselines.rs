//! Designed sparse-recovery baselines: orthogonal matching pursuit and
//! iterative soft thresholding.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dim_err, invalid, Result};
use crate::numkit::{dot, max_eig_sym, shape_str, Cholesky, Mat};

/// Residual norm below which OMP stops before reaching `k` atoms.
pub const OMP_EARLY_EXIT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct OmpResult {
    /// Full-length estimate; zero outside `support`.
    pub x: Vec<f64>,
    /// Selected column indices in selection order.
    pub support: Vec<usize>,
    pub residual_norm: f64,
}

/// Greedy recovery of a `k`-sparse `x` with `y ≈ A x`.
///
/// Each iteration correlates the residual with every column, adds the
/// strongest (lowest index on ties), re-fits all selected coefficients by
/// least squares and updates the residual.
pub fn omp(a: &Mat, y: &[f64], k: usize) -> Result<OmpResult> {
    let (m, n) = a.shape();
    if y.len() != m {
        return Err(dim_err(
            "omp",
            alloc::format!("measurement of length {m}"),
            y.len(),
        ));
    }
    if k == 0 || k > m.min(n) {
        return Err(invalid(alloc::format!(
            "omp: k must be in 1..={} (got {k})",
            m.min(n)
        )));
    }
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut residual = y.to_vec();
    let mut coef: Vec<f64> = Vec::new();
    for _ in 0..k {
        let mut best = 0usize;
        let mut best_c = f64::NEG_INFINITY;
        for j in 0..n {
            if support.contains(&j) {
                continue;
            }
            let c = dot(a.col(j), &residual).abs();
            if c > best_c {
                best_c = c;
                best = j;
            }
        }
        support.push(best);
        coef = support_least_squares(a, &support, y)?;
        residual.copy_from_slice(y);
        for (&j, &cj) in support.iter().zip(&coef) {
            for (r, &aij) in residual.iter_mut().zip(a.col(j)) {
                *r -= aij * cj;
            }
        }
        if libm::sqrt(dot(&residual, &residual)) < OMP_EARLY_EXIT {
            break;
        }
    }
    let mut x = vec![0.0; n];
    for (&j, &cj) in support.iter().zip(&coef) {
        x[j] = cj;
    }
    Ok(OmpResult {
        x,
        support,
        residual_norm: libm::sqrt(dot(&residual, &residual)),
    })
}

fn support_least_squares(a: &Mat, support: &[usize], y: &[f64]) -> Result<Vec<f64>> {
    let sub = a.select_cols(support);
    let gram = sub.tr_matmul(&sub)?;
    let rhs = sub.tr_matmul(&Mat::column_vector(y))?;
    let chol = Cholesky::factor(&gram, "omp support least squares")?;
    Ok(chol.solve(&rhs).into_vec())
}

/// `sign(b) · max(0, |b| − t)` elementwise.
pub fn soft_threshold(b: &Mat, t: f64) -> Mat {
    b.map(|v| soft_scalar(v, t))
}

#[inline]
fn soft_scalar(v: f64, t: f64) -> f64 {
    let mag = v.abs() - t;
    if mag > 0.0 {
        mag.copysign(v)
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IstaConfig {
    /// Weight of the ℓ₁ term.
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the relative objective change falls below this; 0 runs
    /// all `max_iters`.
    pub tol: f64,
    /// Step σ; `None` means `1 / λmax(AᵀA)`.
    pub step: Option<f64>,
    /// Evaluate and keep the objective after every iteration. Ignored (always
    /// on) when `tol > 0`.
    pub record_objective: bool,
}

impl Default for IstaConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            max_iters: 2000,
            tol: 1e-10,
            step: None,
            record_objective: true,
        }
    }
}

impl IstaConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || self.max_iters == 0 || !(self.tol >= 0.0) {
            return Err(invalid(
                "ista: lambda and max_iters must be positive, tol >= 0",
            ));
        }
        if let Some(s) = self.step {
            if !(s > 0.0) {
                return Err(invalid("ista: step must be > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IstaResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖y − Ax‖² + λ‖x‖₁` after every iteration (empty when not recorded).
    pub objective: Vec<f64>,
}

/// `‖y − Ax‖₂² + λ‖x‖₁`
pub fn ista_objective(a: &Mat, y: &[f64], x: &[f64], lambda: f64) -> f64 {
    let ax = a
        .matmul(&Mat::column_vector(x))
        .expect("shape checked by caller");
    let fit: f64 = ax
        .as_slice()
        .iter()
        .zip(y)
        .map(|(p, q)| (q - p) * (q - p))
        .sum();
    fit + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

/// Default step `1 / λmax(AᵀA)`; compute once when solving many problems
/// with the same operator.
pub fn ista_step(a: &Mat) -> Result<f64> {
    let l = max_eig_sym(a);
    if !(l > 0.0) {
        return Err(invalid(alloc::format!(
            "ista: operator {} has no energy",
            shape_str(a)
        )));
    }
    Ok(1.0 / l)
}

/// Iterative soft thresholding from `x₀ = 0`:
/// `b = x + σAᵀ(y − Ax)`, then `x = soft(b, λσ/2)`.
pub fn ista(a: &Mat, y: &[f64], cfg: &IstaConfig) -> Result<IstaResult> {
    cfg.validate()?;
    let (m, n) = a.shape();
    if y.len() != m {
        return Err(dim_err(
            "ista",
            alloc::format!("measurement of length {m}"),
            y.len(),
        ));
    }
    let sigma = match cfg.step {
        Some(s) => s,
        None => ista_step(a)?,
    };
    let thresh = cfg.lambda * sigma / 2.0;
    let mut x = vec![0.0; n];
    let mut r = vec![0.0; m];
    let mut prev = dot(y, y);
    let mut objective = Vec::new();
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        iterations += 1;
        // r = y - A x
        r.copy_from_slice(y);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (ri, &aij) in r.iter_mut().zip(a.col(j)) {
                    *ri -= aij * xj;
                }
            }
        }
        for (j, xj) in x.iter_mut().enumerate() {
            let b = *xj + sigma * dot(a.col(j), &r);
            *xj = soft_scalar(b, thresh);
        }
        if cfg.tol > 0.0 || cfg.record_objective {
            let f = ista_objective(a, y, &x, cfg.lambda);
            objective.push(f);
            let done = cfg.tol > 0.0 && (prev - f).abs() <= cfg.tol * prev.max(f64::MIN_POSITIVE);
            prev = f;
            if done {
                break;
            }
        }
    }
    Ok(IstaResult {
        x,
        iterations,
        objective,
    })
}

/// Orthonormal DCT-II synthesis basis (n×n, columns are atoms), used to
/// give the recovery baselines a sparsifying dictionary for smooth signals.
pub fn dct_basis(n: usize) -> Mat {
    let nf = n as f64;
    Mat::from_fn(n, n, |t, k| {
        let scale = if k == 0 {
            libm::sqrt(1.0 / nf)
        } else {
            libm::sqrt(2.0 / nf)
        };
        scale * libm::cos(core::f64::consts::PI * (t as f64 + 0.5) * k as f64 / nf)
    })
}
