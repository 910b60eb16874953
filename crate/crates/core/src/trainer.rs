//! Split Bregman block-coordinate training.
//!
//! The objective couples the weights to three proxy variables `Z` (first
//! hidden layer), `Z2` (innermost code, `[unsupervised | supervised]`
//! columns) and `Z1` (decoder hidden layer), each tied to its forward
//! composition by a penalty with a Bregman variable:
//!
//! ```text
//! ‖X − W1p Z1‖² + λ‖T − D Z2_S‖²
//!   + μ1‖Z1 − σ(W2p Z2) − B1‖² + μ2‖Z2 − σ(W2 Z) − B2‖² + μ‖Z − σ(W1 X̃) − B‖²
//! ```
//!
//! Every block has a closed-form least-squares update. One sweep runs
//! Z1 → Z2 → Z → W1p → W2p → W2 → W1 → D → Bregman. The encoder sees the
//! normalized poor man's inverse `X̃` (with a bias row); the decoder target is
//! the normalized clean window `X`.

use alloc::vec::Vec;

use crate::error::{dim_err, invalid, Result};
use crate::model::{LayerSizes, LcaeModel};
use crate::numkit::{
    logit, ridge_lstsq_left, shape_str, sigmoid, stacked_ridge_solve, Block, Mat,
    DEFAULT_LOGIT_EPS, DEFAULT_RIDGE,
};
use crate::rng::SeededRng;
use crate::signal::{Dataset, NormStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BregmanRule {
    /// `B ← residual − B`
    #[default]
    Reflected,
    /// `B ← B − residual`, the usual additive Bregman step.
    Conventional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lambda: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu: f64,
    pub ridge: f64,
    /// Clamp applied before inverting the sigmoid in logit targets.
    pub logit_eps: f64,
    pub max_sweeps: usize,
    /// Stop once the relative objective change falls below this; 0 runs
    /// all `max_sweeps`.
    pub tol: f64,
    pub seed: u64,
    pub bregman_rule: BregmanRule,
    pub layer_sizes: LayerSizes,
}

impl TrainConfig {
    pub fn new(layer_sizes: LayerSizes) -> Self {
        Self {
            lambda: 1.0,
            mu1: 0.01,
            mu2: 0.01,
            mu: 0.01,
            ridge: DEFAULT_RIDGE,
            logit_eps: DEFAULT_LOGIT_EPS,
            max_sweeps: 100,
            tol: 1e-6,
            seed: 0,
            bregman_rule: BregmanRule::Reflected,
            layer_sizes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.layer_sizes.validate()?;
        let finite = [
            self.lambda,
            self.mu1,
            self.mu2,
            self.mu,
            self.ridge,
            self.logit_eps,
            self.tol,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("TrainConfig: parameters must be finite"));
        }
        if self.lambda < 0.0 || self.ridge < 0.0 {
            return Err(invalid("TrainConfig: lambda and ridge must be >= 0"));
        }
        if !(self.mu1 > 0.0 && self.mu2 > 0.0 && self.mu > 0.0) {
            return Err(invalid("TrainConfig: mu1, mu2, mu must be > 0"));
        }
        if !(self.logit_eps > 0.0 && self.logit_eps < 0.5) {
            return Err(invalid("TrainConfig: logit_eps must lie in (0, 0.5)"));
        }
        if self.max_sweeps == 0 || !(self.tol >= 0.0) {
            return Err(invalid(
                "TrainConfig: max_sweeps >= 1 and tol >= 0 required",
            ));
        }
        Ok(())
    }
}

/// Training matrices. Columns `[0, N − n_supervised)` are unlabeled, the
/// rest line up with the columns of `targets`.
#[derive(Clone, Debug)]
pub struct TrainData {
    x_tilde: Mat,
    xb: Mat,
    x: Mat,
    targets: Mat,
    n_supervised: usize,
    norm: NormStats,
}

impl TrainData {
    pub fn new(x_tilde: Mat, x: Mat, targets: Mat, n_supervised: usize) -> Result<Self> {
        let n = x.rows();
        Self::with_norm(x_tilde, x, targets, n_supervised, NormStats::identity(n))
    }

    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        Self::with_norm(
            ds.x_tilde.clone(),
            ds.x.clone(),
            ds.targets.clone(),
            ds.n_supervised,
            ds.stats.clone(),
        )
    }

    fn with_norm(
        x_tilde: Mat,
        x: Mat,
        targets: Mat,
        n_supervised: usize,
        norm: NormStats,
    ) -> Result<Self> {
        if x_tilde.shape() != x.shape() {
            return Err(dim_err("TrainData", shape_str(&x), shape_str(&x_tilde)));
        }
        if n_supervised > x.cols() {
            return Err(invalid(
                "TrainData: n_supervised exceeds the number of windows",
            ));
        }
        if targets.cols() != n_supervised {
            return Err(dim_err(
                "TrainData targets",
                alloc::format!("{n_supervised} columns"),
                shape_str(&targets),
            ));
        }
        if norm.dim() != x.rows() {
            return Err(dim_err("TrainData norm stats", x.rows(), norm.dim()));
        }
        Ok(Self {
            xb: x_tilde.with_ones_row(),
            x_tilde,
            x,
            targets,
            n_supervised,
            norm,
        })
    }

    pub fn len(&self) -> usize {
        self.x.cols()
    }
    pub fn is_empty(&self) -> bool {
        self.x.cols() == 0
    }
    pub fn n_supervised(&self) -> usize {
        self.n_supervised
    }
    pub fn n_unsupervised(&self) -> usize {
        self.x.cols() - self.n_supervised
    }
    pub fn x(&self) -> &Mat {
        &self.x
    }
    pub fn x_tilde(&self) -> &Mat {
        &self.x_tilde
    }
    /// `X̃` with the constant-one row appended.
    pub fn x_tilde_bias(&self) -> &Mat {
        &self.xb
    }
    pub fn targets(&self) -> &Mat {
        &self.targets
    }

    fn check(&self, cfg: &TrainConfig) -> Result<()> {
        let s = cfg.layer_sizes;
        if self.x.rows() != s.n {
            return Err(dim_err(
                "train",
                alloc::format!("windows of length {}", s.n),
                self.x.rows(),
            ));
        }
        if self.n_supervised > 0 && self.targets.rows() != s.c {
            return Err(dim_err(
                "train targets",
                alloc::format!("{} rows", s.c),
                self.targets.rows(),
            ));
        }
        if self.is_empty() {
            return Err(crate::error::Error::Empty(
                "train needs at least one window",
            ));
        }
        Ok(())
    }
}

/// Proxies and Bregman variables carried between sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainState {
    pub z: Mat,
    pub z1: Mat,
    pub z2: Mat,
    pub b: Mat,
    pub b1: Mat,
    pub b2: Mat,
    /// Objective after each completed sweep.
    pub objective_history: Vec<f64>,
}

impl TrainState {
    fn check(&self, s: &LayerSizes, n: usize) -> Result<()> {
        let want = [
            (&self.z, s.h1),
            (&self.b, s.h1),
            (&self.z1, s.h1),
            (&self.b1, s.h1),
            (&self.z2, s.h2),
            (&self.b2, s.h2),
        ];
        for (m, rows) in want {
            if m.shape() != (rows, n) {
                return Err(dim_err(
                    "TrainState",
                    alloc::format!("{rows}x{n}"),
                    shape_str(m),
                ));
            }
        }
        Ok(())
    }
}

/// Seeded weights with scale `1/√fan_in`, proxies set to their forward
/// compositions, Bregman variables zero.
pub fn init_state(cfg: &TrainConfig, data: &TrainData) -> Result<(LcaeModel, TrainState)> {
    cfg.validate()?;
    data.check(cfg)?;
    let s = cfg.layer_sizes;
    let mut rng = SeededRng::new(cfg.seed);
    let mut draw = |(r, c): (usize, usize)| {
        let scale = 1.0 / libm::sqrt(c as f64);
        Mat::from_fn(r, c, |_, _| rng.normal() * scale)
    };
    let w1 = draw(s.w1_shape());
    let w2 = draw(s.w2_shape());
    let w2p = draw(s.w2p_shape());
    let w1p = draw(s.w1p_shape());
    let d = draw(s.d_shape());
    let model = LcaeModel::from_parts(s, w1, w2, w2p, w1p, d, data.norm.clone())?;
    let z = sigmoid(&model.w1.matmul(&data.xb)?);
    let z2 = sigmoid(&model.w2.matmul(&z)?);
    let z1 = sigmoid(&model.w2p.matmul(&z2)?);
    let n = data.len();
    let state = TrainState {
        b: Mat::zeros(s.h1, n),
        b1: Mat::zeros(s.h1, n),
        b2: Mat::zeros(s.h2, n),
        z,
        z1,
        z2,
        objective_history: Vec::new(),
    };
    Ok((model, state))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightBlock {
    W1p,
    W2p,
    W2,
    W1,
    D,
}

impl WeightBlock {
    pub const SWEEP_ORDER: [WeightBlock; 5] = [Self::W1p, Self::W2p, Self::W2, Self::W1, Self::D];
}

/// Closed-form ridge solve for one weight matrix with everything else held:
///
/// - `W1p = argmin ‖X − W1p Z1‖`
/// - `W2p = argmin ‖logit(Z1 − B1) − W2p Z2‖`
/// - `W2  = argmin ‖logit(Z2 − B2) − W2 Z‖`
/// - `W1  = argmin ‖logit(Z − B) − W1 [X̃; 1]‖`
/// - `D   = argmin ‖T − D Z2_S‖`
///
/// `D` is returned unchanged when there are no supervised columns.
pub fn solve_weight_block(
    which: WeightBlock,
    state: &TrainState,
    model: &LcaeModel,
    data: &TrainData,
    cfg: &TrainConfig,
) -> Result<Mat> {
    let eps = cfg.logit_eps;
    match which {
        WeightBlock::W1p => ridge_lstsq_left(&data.x, &state.z1, cfg.ridge),
        WeightBlock::W2p => {
            ridge_lstsq_left(&logit(&state.z1.sub(&state.b1)?, eps), &state.z2, cfg.ridge)
        }
        WeightBlock::W2 => {
            ridge_lstsq_left(&logit(&state.z2.sub(&state.b2)?, eps), &state.z, cfg.ridge)
        }
        WeightBlock::W1 => {
            ridge_lstsq_left(&logit(&state.z.sub(&state.b)?, eps), &data.xb, cfg.ridge)
        }
        WeightBlock::D => {
            if data.n_supervised == 0 {
                return Ok(model.d.clone());
            }
            ridge_lstsq_left(&data.targets, &supervised(&state.z2, data), cfg.ridge)
        }
    }
}

fn supervised(m: &Mat, data: &TrainData) -> Mat {
    m.cols_range(data.n_unsupervised(), m.cols())
}

/// `argmin ‖X − W1p Z1‖² + μ1‖Z1 − σ(W2p Z2) − B1‖²`
pub fn solve_z1(
    state: &TrainState,
    model: &LcaeModel,
    data: &TrainData,
    cfg: &TrainConfig,
) -> Result<Mat> {
    let anchor = sigmoid(&model.w2p.matmul(&state.z2)?).add(&state.b1)?;
    stacked_ridge_solve(
        &[
            Block::dense(&model.w1p, &data.x, 1.0),
            Block::identity(&anchor, cfg.mu1),
        ],
        cfg.ridge,
    )
}

/// Innermost code update. Unlabeled columns minimize
/// `μ1‖logit(Z1 − B1) − W2p Z2‖² + μ2‖Z2 − σ(W2 Z) − B2‖²`; labeled columns
/// add `λ‖T − D Z2‖²`. The two groups are independent.
pub fn solve_z2(
    state: &TrainState,
    model: &LcaeModel,
    data: &TrainData,
    cfg: &TrainConfig,
) -> Result<Mat> {
    let lz1 = logit(&state.z1.sub(&state.b1)?, cfg.logit_eps);
    let anchor = sigmoid(&model.w2.matmul(&state.z)?).add(&state.b2)?;
    let nu = data.n_unsupervised();
    let n = data.len();
    let mut out = Mat::zeros(cfg.layer_sizes.h2, n);
    if nu > 0 {
        let l = lz1.cols_range(0, nu);
        let a = anchor.cols_range(0, nu);
        let zu = stacked_ridge_solve(
            &[
                Block::dense(&model.w2p, &l, cfg.mu1),
                Block::identity(&a, cfg.mu2),
            ],
            cfg.ridge,
        )?;
        out.set_cols(0, &zu)?;
    }
    if nu < n {
        let l = lz1.cols_range(nu, n);
        let a = anchor.cols_range(nu, n);
        let mut blocks = alloc::vec![
            Block::dense(&model.w2p, &l, cfg.mu1),
            Block::identity(&a, cfg.mu2)
        ];
        if cfg.lambda > 0.0 {
            blocks.push(Block::dense(&model.d, &data.targets, cfg.lambda));
        }
        let zs = stacked_ridge_solve(&blocks, cfg.ridge)?;
        out.set_cols(nu, &zs)?;
    }
    Ok(out)
}

/// `argmin μ2‖logit(Z2 − B2) − W2 Z‖² + μ‖Z − σ(W1 [X̃; 1]) − B‖²`
pub fn solve_z(
    state: &TrainState,
    model: &LcaeModel,
    data: &TrainData,
    cfg: &TrainConfig,
) -> Result<Mat> {
    let lz2 = logit(&state.z2.sub(&state.b2)?, cfg.logit_eps);
    let anchor = sigmoid(&model.w1.matmul(&data.xb)?).add(&state.b)?;
    stacked_ridge_solve(
        &[
            Block::dense(&model.w2, &lz2, cfg.mu2),
            Block::identity(&anchor, cfg.mu),
        ],
        cfg.ridge,
    )
}

/// Residuals `Z1 − σ(W2p Z2)`, `Z2 − σ(W2 Z)`, `Z − σ(W1 [X̃; 1])`.
fn residuals(state: &TrainState, model: &LcaeModel, data: &TrainData) -> Result<[Mat; 3]> {
    Ok([
        state.z1.sub(&sigmoid(&model.w2p.matmul(&state.z2)?))?,
        state.z2.sub(&sigmoid(&model.w2.matmul(&state.z)?))?,
        state.z.sub(&sigmoid(&model.w1.matmul(&data.xb)?))?,
    ])
}

/// Bregman step on `B1`, `B2`, `B` from the current residuals `R`:
/// `B ← R − B` (reflected rule) or `B ← B − R` (conventional rule).
pub fn update_bregman(
    state: &mut TrainState,
    model: &LcaeModel,
    data: &TrainData,
    cfg: &TrainConfig,
) -> Result<()> {
    let [r1, r2, r] = residuals(state, model, data)?;
    let step = |b: &Mat, res: &Mat| match cfg.bregman_rule {
        BregmanRule::Reflected => res.sub(b),
        BregmanRule::Conventional => b.sub(res),
    };
    state.b1 = step(&state.b1, &r1)?;
    state.b2 = step(&state.b2, &r2)?;
    state.b = step(&state.b, &r)?;
    Ok(())
}

/// The five squared-Frobenius terms of the objective, already weighted.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ObjectiveTerms {
    pub reconstruction: f64,
    pub label: f64,
    pub decoder_penalty: f64,
    pub code_penalty: f64,
    pub encoder_penalty: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.reconstruction
            + self.label
            + self.decoder_penalty
            + self.code_penalty
            + self.encoder_penalty
    }
}

pub fn objective_terms(
    state: &TrainState,
    model: &LcaeModel,
    data: &TrainData,
    cfg: &TrainConfig,
) -> Result<ObjectiveTerms> {
    state.check(&cfg.layer_sizes, data.len())?;
    let reconstruction = data.x.sub(&model.w1p.matmul(&state.z1)?)?.norm_sq();
    let label = if data.n_supervised > 0 {
        cfg.lambda
            * data
                .targets
                .sub(&model.d.matmul(&supervised(&state.z2, data))?)?
                .norm_sq()
    } else {
        0.0
    };
    let [r1, r2, r] = residuals(state, model, data)?;
    Ok(ObjectiveTerms {
        reconstruction,
        label,
        decoder_penalty: cfg.mu1 * r1.sub(&state.b1)?.norm_sq(),
        code_penalty: cfg.mu2 * r2.sub(&state.b2)?.norm_sq(),
        encoder_penalty: cfg.mu * r.sub(&state.b)?.norm_sq(),
    })
}

pub fn objective(
    state: &TrainState,
    model: &LcaeModel,
    data: &TrainData,
    cfg: &TrainConfig,
) -> Result<f64> {
    Ok(objective_terms(state, model, data, cfg)?.total())
}

/// One full sweep: proxies, weights, then Bregman variables. Returns the
/// objective terms evaluated afterwards and appends the total to the history.
pub fn sweep(
    state: &mut TrainState,
    model: &mut LcaeModel,
    data: &TrainData,
    cfg: &TrainConfig,
) -> Result<ObjectiveTerms> {
    state.z1 = solve_z1(state, model, data, cfg)?;
    state.z2 = solve_z2(state, model, data, cfg)?;
    state.z = solve_z(state, model, data, cfg)?;
    for which in WeightBlock::SWEEP_ORDER {
        let w = solve_weight_block(which, state, model, data, cfg)?;
        match which {
            WeightBlock::W1p => model.w1p = w,
            WeightBlock::W2p => model.w2p = w,
            WeightBlock::W2 => model.w2 = w,
            WeightBlock::W1 => model.w1 = w,
            WeightBlock::D => model.d = w,
        }
    }
    update_bregman(state, model, data, cfg)?;
    let terms = objective_terms(state, model, data, cfg)?;
    if !terms.total().is_finite() {
        return Err(invalid("training diverged: objective is not finite"));
    }
    state.objective_history.push(terms.total());
    Ok(terms)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    /// Zero-based sweep index.
    pub sweep: usize,
    pub terms: ObjectiveTerms,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: LcaeModel,
    pub state: TrainState,
    /// Objective at the forward-consistent starting point.
    pub initial_objective: f64,
    /// True when the relative-change criterion stopped training early.
    pub converged: bool,
}

/// Runs sweeps until the relative objective change drops below `tol` or
/// `max_sweeps` is reached. `observer` sees every sweep as it finishes.
pub fn train_with(
    cfg: &TrainConfig,
    data: &TrainData,
    mut observer: impl FnMut(&SweepReport),
) -> Result<TrainOutcome> {
    let (mut model, mut state) = init_state(cfg, data)?;
    let initial_objective = objective(&state, &model, data, cfg)?;
    let mut prev = initial_objective;
    let mut converged = false;
    for i in 0..cfg.max_sweeps {
        let terms = sweep(&mut state, &mut model, data, cfg)?;
        observer(&SweepReport { sweep: i, terms });
        let cur = terms.total();
        let rel = (prev - cur).abs() / prev.abs().max(f64::MIN_POSITIVE);
        prev = cur;
        if rel < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(TrainOutcome {
        model,
        state,
        initial_objective,
        converged,
    })
}

pub fn train(cfg: &TrainConfig, data: &TrainData) -> Result<TrainOutcome> {
    train_with(cfg, data, |_| {})
}
