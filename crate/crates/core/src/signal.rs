//! Signal preparation: windowing, rational resampling, per-feature
//! standardization, one-hot targets and assembly of training triples.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dim_err, invalid, Result};
use crate::numkit::{shape_str, Mat};
use crate::sensing::SensingMatrix;

/// Label value marking an unlabeled window.
pub const UNLABELED: i64 = -1;
/// Lower bound applied to every fitted feature scale.
pub const SCALE_FLOOR: f64 = 1e-8;

/// Clean windows stored as columns, with per-window labels (−1 = unlabeled)
/// and record identifiers.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowSet {
    pub x: Mat,
    pub labels: Vec<i64>,
    pub sample_rate_hz: f64,
    pub source_ids: Vec<String>,
}

impl WindowSet {
    pub fn new(
        x: Mat,
        labels: Vec<i64>,
        sample_rate_hz: f64,
        source_ids: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != x.cols() || source_ids.len() != x.cols() {
            return Err(dim_err(
                "WindowSet::new",
                alloc::format!("{} labels and ids", x.cols()),
                alloc::format!("{} labels, {} ids", labels.len(), source_ids.len()),
            ));
        }
        if labels.iter().any(|&l| l < UNLABELED) {
            return Err(invalid("WindowSet: labels must be >= -1"));
        }
        if !(sample_rate_hz > 0.0) {
            return Err(invalid("WindowSet: sample rate must be positive"));
        }
        Ok(Self {
            x,
            labels,
            sample_rate_hz,
            source_ids,
        })
    }

    pub fn window_len(&self) -> usize {
        self.x.rows()
    }

    pub fn len(&self) -> usize {
        self.x.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.cols() == 0
    }

    pub fn n_labeled(&self) -> usize {
        self.labels.iter().filter(|&&l| l >= 0).count()
    }
}

/// Splits a 1-D series into windows starting at `0, hop, 2·hop, …`; a
/// trailing partial window is dropped.
pub fn segment(signal: &[f64], window_len: usize, hop: usize) -> Result<Vec<Vec<f64>>> {
    if window_len == 0 || hop == 0 {
        return Err(invalid("segment: window length and hop must be >= 1"));
    }
    let mut out = Vec::new();
    let mut start = 0;
    while start + window_len <= signal.len() {
        out.push(signal[start..start + window_len].to_vec());
        start += hop;
    }
    Ok(out)
}

/// Taps per output sample of the anti-aliasing filter.
pub const RESAMPLE_TAPS: usize = 64;

/// Rational-ratio resampling with a Blackman-windowed sinc low-pass whose
/// cutoff sits at the lower of the two Nyquist rates.
///
/// The rate ratio is reduced to `up/down` (continued fractions, denominator
/// at most 100 000), output sample `k` sits at input position `k·down/up`,
/// and each output uses the 64 nearest input samples with taps renormalized
/// to unit sum so constant signals stay constant up to the edges.
pub fn resample(signal: &[f64], from_hz: f64, to_hz: f64) -> Result<Vec<f64>> {
    if !(from_hz > 0.0) || !(to_hz > 0.0) || !from_hz.is_finite() || !to_hz.is_finite() {
        return Err(invalid(
            "resample: sample rates must be positive and finite",
        ));
    }
    if from_hz == to_hz || signal.is_empty() {
        return Ok(signal.to_vec());
    }
    let (up, down) = rational_approx(to_hz / from_hz, 100_000);
    let len = signal.len() as u64;
    let out_len = ((len - 1) * up / down + 1) as usize;
    // cutoff in cycles per input sample
    let fc = 0.5 * (up as f64 / down as f64).min(1.0);
    let half = (RESAMPLE_TAPS / 2) as i64;
    let span = half as f64 + 1.0;
    let mut out = Vec::with_capacity(out_len);
    let mut taps = [0.0f64; RESAMPLE_TAPS];
    for k in 0..out_len as u64 {
        let num = k * down;
        let base = (num / up) as i64;
        let frac = (num % up) as f64 / up as f64;
        let first = base - half + 1;
        let mut sum = 0.0;
        for (i, tap) in taps.iter_mut().enumerate() {
            let idx = first + i as i64;
            let t = idx as f64 - (base as f64 + frac);
            let w = if idx < 0 || idx >= len as i64 {
                0.0
            } else {
                windowed_sinc(t, fc, span)
            };
            *tap = w;
            sum += w;
        }
        let mut acc = 0.0;
        if sum != 0.0 {
            for (i, &w) in taps.iter().enumerate() {
                if w != 0.0 {
                    acc += w * signal[(first + i as i64) as usize];
                }
            }
            acc /= sum;
        }
        out.push(acc);
    }
    Ok(out)
}

fn windowed_sinc(t: f64, fc: f64, span: f64) -> f64 {
    use core::f64::consts::PI;
    if t.abs() >= span {
        return 0.0;
    }
    let x = 2.0 * fc * t;
    let sinc = if x == 0.0 {
        1.0
    } else {
        libm::sin(PI * x) / (PI * x)
    };
    // Blackman window over [-span, span]
    let p = (t + span) / (2.0 * span);
    let w = 0.42 - 0.5 * libm::cos(2.0 * PI * p) + 0.08 * libm::cos(4.0 * PI * p);
    2.0 * fc * sinc * w
}

/// Best rational approximation `p/q` of `x` with `q <= max_den`.
fn rational_approx(x: f64, max_den: u64) -> (u64, u64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut v = x;
    loop {
        let a = libm::floor(v) as u64;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let f = v - a as f64;
        if f < 1e-12 || (p1 as f64 / q1 as f64 - x).abs() <= 1e-12 * x {
            break;
        }
        v = 1.0 / f;
    }
    if q1 == 0 {
        (libm::round(x).max(1.0) as u64, 1)
    } else {
        (p1.max(1), q1)
    }
}

/// Per-feature (row) standardization statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl NormStats {
    /// Mean zero, scale one: applying it changes nothing.
    pub fn identity(n: usize) -> Self {
        Self {
            mean: vec![0.0; n],
            scale: vec![1.0; n],
        }
    }

    /// Fits mean and population standard deviation of every row of `x`
    /// over its columns; scales are floored at [`SCALE_FLOOR`].
    pub fn fit(x: &Mat) -> Result<Self> {
        let (n, cols) = x.shape();
        if cols == 0 {
            return Err(crate::error::Error::Empty(
                "fit_normalizer needs at least one window",
            ));
        }
        let mut mean = vec![0.0; n];
        for c in 0..cols {
            for (m, v) in mean.iter_mut().zip(x.col(c)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= cols as f64);
        let mut var = vec![0.0; n];
        for c in 0..cols {
            for ((s, v), m) in var.iter_mut().zip(x.col(c)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| libm::sqrt(s / cols as f64).max(SCALE_FLOOR))
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.scale.len() {
            return Err(invalid("NormStats: mean and scale lengths differ"));
        }
        if self.scale.iter().any(|s| !(*s > 0.0) || !s.is_finite())
            || self.mean.iter().any(|m| !m.is_finite())
        {
            return Err(invalid("NormStats: scales must be finite and > 0"));
        }
        Ok(())
    }

    fn check(&self, x: &Mat, op: &'static str) -> Result<()> {
        if x.rows() != self.dim() {
            return Err(dim_err(
                op,
                alloc::format!("{} rows", self.dim()),
                shape_str(x),
            ));
        }
        Ok(())
    }

    pub fn apply(&self, x: &Mat) -> Result<Mat> {
        self.check(x, "NormStats::apply")?;
        Ok(Mat::from_fn(x.rows(), x.cols(), |r, c| {
            (x.get(r, c) - self.mean[r]) / self.scale[r]
        }))
    }

    pub fn invert(&self, x: &Mat) -> Result<Mat> {
        self.check(x, "NormStats::invert")?;
        Ok(Mat::from_fn(x.rows(), x.cols(), |r, c| {
            x.get(r, c) * self.scale[r] + self.mean[r]
        }))
    }
}

/// Shorthand for [`NormStats::fit`].
pub fn fit_normalizer(x: &Mat) -> Result<NormStats> {
    NormStats::fit(x)
}

/// One column per label with a single 1 at row `label`.
pub fn one_hot(labels: &[usize], num_classes: usize) -> Result<Mat> {
    if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(invalid(alloc::format!(
            "one_hot: label {bad} outside 0..{num_classes}"
        )));
    }
    Ok(Mat::from_fn(num_classes, labels.len(), |r, c| {
        if labels[c] == r {
            1.0
        } else {
            0.0
        }
    }))
}

/// Training triple ready for the trainer: normalized clean windows `x`,
/// normalized poor-man's-inverse inputs `x_tilde`, and one-hot targets for
/// the trailing `n_supervised` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x_tilde: Mat,
    pub x: Mat,
    pub targets: Mat,
    pub n_supervised: usize,
    pub num_classes: usize,
    /// Labels in dataset column order (−1 for the unlabeled prefix).
    pub labels: Vec<i64>,
    pub source_ids: Vec<String>,
    pub stats: NormStats,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.x.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.cols() == 0
    }

    pub fn n_unsupervised(&self) -> usize {
        self.x.cols() - self.n_supervised
    }

    /// Checks shapes directly, for datasets built by hand.
    pub fn validate(&self) -> Result<()> {
        if self.x.shape() != self.x_tilde.shape() {
            return Err(dim_err(
                "Dataset",
                shape_str(&self.x),
                shape_str(&self.x_tilde),
            ));
        }
        if self.n_supervised > self.x.cols() {
            return Err(invalid("Dataset: more supervised columns than windows"));
        }
        if self.targets.cols() != self.n_supervised
            || (self.n_supervised > 0 && self.targets.rows() != self.num_classes)
        {
            return Err(dim_err(
                "Dataset targets",
                alloc::format!("{}x{}", self.num_classes, self.n_supervised),
                shape_str(&self.targets),
            ));
        }
        Ok(())
    }
}

/// Reorders windows so unlabeled ones come first (each group keeping file
/// order), normalizes the clean windows and their `ΦᵀΦ` images with the same
/// statistics, and one-hot encodes the labeled tail.
pub fn assemble(
    ws: &WindowSet,
    phi: &SensingMatrix,
    stats: &NormStats,
    num_classes: usize,
) -> Result<Dataset> {
    if phi.n() != ws.window_len() {
        return Err(dim_err(
            "assemble",
            alloc::format!("windows of length {}", phi.n()),
            ws.window_len(),
        ));
    }
    stats.validate()?;
    if num_classes == 0 {
        return Err(invalid("assemble: need at least one class"));
    }
    let mut order: Vec<usize> = (0..ws.len()).filter(|&i| ws.labels[i] < 0).collect();
    let n_unsup = order.len();
    order.extend((0..ws.len()).filter(|&i| ws.labels[i] >= 0));
    let clean = ws.x.select_cols(&order);
    let noisy = phi.adjoint(&phi.compress(&clean)?)?;
    let labels: Vec<i64> = order.iter().map(|&i| ws.labels[i]).collect();
    let sup: Vec<usize> = labels[n_unsup..].iter().map(|&l| l as usize).collect();
    Ok(Dataset {
        x_tilde: stats.apply(&noisy)?,
        x: stats.apply(&clean)?,
        targets: one_hot(&sup, num_classes)?,
        n_supervised: sup.len(),
        num_classes,
        labels,
        source_ids: order.iter().map(|&i| ws.source_ids[i].clone()).collect(),
        stats: stats.clone(),
    })
}
