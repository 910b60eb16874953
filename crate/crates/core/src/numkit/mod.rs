//! Dense matrix container and the handful of kernels everything else is
//! built from: elementwise sigmoid/logit, ridge-regularized least squares
//! (single and stacked), and power iteration for the top eigenvalue of AᵀA.

mod mat;

use alloc::vec;
use alloc::vec::Vec;

pub use mat::Mat;
pub(crate) use mat::{dot, shape_str};

use crate::error::{dim_err, invalid, Error, Result};

/// Ridge added to every closed-form solve unless the caller says otherwise.
pub const DEFAULT_RIDGE: f64 = 1e-8;
/// Default clamp used before inverting the sigmoid.
pub const DEFAULT_LOGIT_EPS: f64 = 1e-6;

const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
pub fn sigmoid_scalar(v: f64) -> f64 {
    let s = if v >= 0.0 {
        1.0 / (1.0 + libm::exp(-v))
    } else {
        let e = libm::exp(v);
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP)
}

/// Elementwise logistic function; every output lies strictly inside (0, 1).
pub fn sigmoid(v: &Mat) -> Mat {
    v.map(sigmoid_scalar)
}

#[inline]
pub fn logit_scalar(v: f64, eps: f64) -> f64 {
    let u = v.clamp(eps, 1.0 - eps);
    libm::log(u / (1.0 - u))
}

/// Elementwise inverse sigmoid of `v` clamped to `[eps, 1 - eps]`.
///
/// Proxy variables drift outside (0, 1) mid-training, so the clamp is what
/// keeps the recast sub-problems finite.
pub fn logit(v: &Mat, eps: f64) -> Mat {
    debug_assert!(eps > 0.0 && eps < 0.5);
    v.map(|x| logit_scalar(x, eps))
}

/// Cholesky factor of a symmetric positive-definite matrix (lower triangle,
/// stored densely).
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>, // row-major lower triangle
}

impl Cholesky {
    pub(crate) fn factor(g: &Mat, op: &'static str) -> Result<Self> {
        let n = g.rows();
        if g.cols() != n {
            return Err(dim_err(op, "square Gram matrix", shape_str(g)));
        }
        let max_diag = (0..n).map(|i| g.get(i, i).abs()).fold(0.0, f64::max);
        let floor = max_diag * 1e-14;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = g.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > floor) || s <= 0.0 {
                        return Err(Error::Singular {
                            op,
                            hint: "; pass a ridge delta > 0",
                        });
                    }
                    l[i * n + i] = libm::sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    /// Solves `G X = B` column by column.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn solve(&self, b: &Mat) -> Mat {
        let n = self.n;
        let mut out = b.clone();
        for c in 0..out.cols() {
            let x = out.col_mut(c);
            for i in 0..n {
                let mut s = x[i];
                for k in 0..i {
                    s -= self.l[i * n + k] * x[k];
                }
                x[i] = s / self.l[i * n + i];
            }
            for i in (0..n).rev() {
                let mut s = x[i];
                for k in i + 1..n {
                    s -= self.l[k * n + i] * x[k];
                }
                x[i] = s / self.l[i * n + i];
            }
        }
        out
    }
}

/// Returns `W` minimizing `‖Y − W Z‖²_F + delta ‖W‖²_F`, i.e. the solution of
/// `W (Z Zᵀ + delta I) = Y Zᵀ`.
pub fn ridge_lstsq_left(y: &Mat, z: &Mat, delta: f64) -> Result<Mat> {
    if y.cols() != z.cols() {
        return Err(dim_err(
            "ridge_lstsq_left",
            alloc::format!("{} columns", z.cols()),
            y.cols(),
        ));
    }
    if delta < 0.0 {
        return Err(invalid("ridge_lstsq_left: delta must be >= 0"));
    }
    let mut gram = z.matmul_tr(z)?;
    for i in 0..gram.rows() {
        gram.set(i, i, gram.get(i, i) + delta);
    }
    let rhs = z.matmul_tr(y)?; // q x p
    let chol = Cholesky::factor(&gram, "ridge_lstsq_left")?;
    Ok(chol.solve(&rhs).transpose())
}

/// Left factor of one block in a stacked least-squares problem.
#[derive(Clone, Copy, Debug)]
pub enum Operator<'a> {
    Identity,
    Dense(&'a Mat),
}

/// One weighted term `weight · ‖target − op · Z‖²_F`.
#[derive(Clone, Copy, Debug)]
pub struct Block<'a> {
    pub op: Operator<'a>,
    pub target: &'a Mat,
    pub weight: f64,
}

impl<'a> Block<'a> {
    pub fn identity(target: &'a Mat, weight: f64) -> Self {
        Self {
            op: Operator::Identity,
            target,
            weight,
        }
    }

    pub fn dense(op: &'a Mat, target: &'a Mat, weight: f64) -> Self {
        Self {
            op: Operator::Dense(op),
            target,
            weight,
        }
    }
}

/// Minimizes `Σ wᵢ ‖Cᵢ − Aᵢ Z‖²_F + delta ‖Z‖²_F` over `Z` through the
/// normal equations `(Σ wᵢ AᵢᵀAᵢ + delta I) Z = Σ wᵢ AᵢᵀCᵢ`.
pub fn stacked_ridge_solve(blocks: &[Block<'_>], delta: f64) -> Result<Mat> {
    const OP: &str = "stacked_ridge_solve";
    let first = blocks
        .first()
        .ok_or(Error::Empty("stacked_ridge_solve needs a block"))?;
    let q = match first.op {
        Operator::Identity => first.target.rows(),
        Operator::Dense(a) => a.cols(),
    };
    let ncols = first.target.cols();
    let mut gram = Mat::zeros(q, q);
    let mut rhs = Mat::zeros(q, ncols);
    for b in blocks {
        if !(b.weight > 0.0) {
            return Err(invalid("stacked_ridge_solve: block weights must be > 0"));
        }
        if b.target.cols() != ncols {
            return Err(dim_err(
                OP,
                alloc::format!("{ncols} target columns"),
                b.target.cols(),
            ));
        }
        match b.op {
            Operator::Identity => {
                if b.target.rows() != q {
                    return Err(dim_err(
                        OP,
                        alloc::format!("identity target with {q} rows"),
                        shape_str(b.target),
                    ));
                }
                for i in 0..q {
                    gram.set(i, i, gram.get(i, i) + b.weight);
                }
                rhs = rhs.add(&b.target.scale(b.weight))?;
            }
            Operator::Dense(a) => {
                if a.cols() != q || a.rows() != b.target.rows() {
                    return Err(dim_err(
                        OP,
                        alloc::format!("operator with {q} columns and {} rows", b.target.rows()),
                        shape_str(a),
                    ));
                }
                gram = gram.add(&a.tr_matmul(a)?.scale(b.weight))?;
                rhs = rhs.add(&a.tr_matmul(b.target)?.scale(b.weight))?;
            }
        }
    }
    for i in 0..q {
        gram.set(i, i, gram.get(i, i) + delta);
    }
    Ok(Cholesky::factor(&gram, OP)?.solve(&rhs))
}

const POWER_MAX_ITERS: usize = 1000;
const POWER_REL_TOL: f64 = 1e-8;

/// Largest eigenvalue of `AᵀA` by power iteration from the normalized
/// all-ones vector.
pub fn max_eig_sym(a: &Mat) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return 0.0;
    }
    let starts: [fn(usize, usize) -> f64; 2] = [|_, _| 1.0, |i, n| 1.0 + i as f64 / n as f64];
    for start in starts {
        let mut v: Vec<f64> = (0..n).map(|i| start(i, n)).collect();
        normalize(&mut v);
        let mut rho = 0.0;
        let mut ok = false;
        for _ in 0..POWER_MAX_ITERS {
            let av = a.matmul(&Mat::column_vector(&v)).expect("shape checked");
            let next = rho_and_step(a, &av);
            let Some((new_rho, w)) = next else { break };
            ok = true;
            let done = (new_rho - rho).abs() < POWER_REL_TOL * new_rho;
            rho = new_rho;
            v = w;
            if done {
                break;
            }
        }
        if ok {
            return rho;
        }
    }
    0.0
}

fn rho_and_step(a: &Mat, av: &Mat) -> Option<(f64, Vec<f64>)> {
    let rho = av.norm_sq(); // v is unit-norm, so ‖Av‖² is the Rayleigh quotient
    if rho == 0.0 {
        return None;
    }
    let mut w = a.tr_matmul(av).expect("shape checked").into_vec();
    normalize(&mut w);
    Some((rho, w))
}

fn normalize(v: &mut [f64]) {
    let n = libm::sqrt(dot(v, v));
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
