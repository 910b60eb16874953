//! Reconstruction and classification metrics.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{dim_err, invalid, Error, Result};
use crate::numkit::{shape_str, Mat};

/// Per-column NMSE with its mean and population standard deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct NmseReport {
    pub per_column: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// `‖truth − recon‖₂ / ‖truth‖₂` per column (a ratio of norms, not squared).
pub fn nmse(truth: &Mat, recon: &Mat) -> Result<NmseReport> {
    if truth.shape() != recon.shape() {
        return Err(dim_err("nmse", shape_str(truth), shape_str(recon)));
    }
    if truth.cols() == 0 {
        return Err(Error::Empty("nmse needs at least one column"));
    }
    let mut per_column = Vec::with_capacity(truth.cols());
    for c in 0..truth.cols() {
        let (t, r) = (truth.col(c), recon.col(c));
        let den: f64 = t.iter().map(|v| v * v).sum();
        if den == 0.0 {
            return Err(invalid(format!("nmse: truth column {c} has zero norm")));
        }
        let num: f64 = t.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum();
        per_column.push(libm::sqrt(num) / libm::sqrt(den));
    }
    let (mean, std) = mean_std(&per_column);
    Ok(NmseReport {
        per_column,
        mean,
        std,
    })
}

/// Mean and population standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Confusion counts; rows are true classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Confusion {
    classes: usize,
    counts: Vec<u64>,
}

impl Confusion {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_counts(rows: &[Vec<u64>]) -> Result<Self> {
        let c = rows.len();
        if rows.iter().any(|r| r.len() != c) {
            return Err(invalid("Confusion: counts must be square"));
        }
        Ok(Self {
            classes: c,
            counts: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize], classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(dim_err(
                "Confusion::from_predictions",
                truth.len(),
                predicted.len(),
            ));
        }
        let mut conf = Self::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            conf.record(t, p)?;
        }
        Ok(conf)
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        if truth >= self.classes || predicted >= self.classes {
            return Err(invalid(format!(
                "Confusion: class pair ({truth}, {predicted}) outside 0..{}",
                self.classes
            )));
        }
        self.counts[truth * self.classes + predicted] += 1;
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|i| self.get(i, i)).sum()
    }
}

/// One-vs-rest metrics for a single class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassStat {
    pub sensitivity: f64,
    pub specificity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassMetrics {
    pub accuracy: f64,
    pub per_class: Vec<ClassStat>,
    /// Cells whose denominator was zero and were reported as 0.
    pub warnings: Vec<String>,
}

/// Accuracy plus per-class sensitivity and specificity. Cells with a zero
/// denominator are reported as 0 and listed in `warnings`.
pub fn class_metrics(conf: &Confusion) -> Result<ClassMetrics> {
    let total = conf.total();
    if total == 0 {
        return Err(Error::Empty("class_metrics needs at least one count"));
    }
    let c = conf.classes();
    let mut per_class = Vec::with_capacity(c);
    let mut warnings = Vec::new();
    for k in 0..c {
        let tp = conf.get(k, k);
        let fn_: u64 = (0..c).filter(|&j| j != k).map(|j| conf.get(k, j)).sum();
        let fp: u64 = (0..c).filter(|&i| i != k).map(|i| conf.get(i, k)).sum();
        let tn = total - tp - fn_ - fp;
        let sensitivity = ratio(tp, tp + fn_).unwrap_or_else(|| {
            warnings.push(format!(
                "class {k}: no positives, sensitivity reported as 0"
            ));
            0.0
        });
        let specificity = ratio(tn, tn + fp).unwrap_or_else(|| {
            warnings.push(format!(
                "class {k}: no negatives, specificity reported as 0"
            ));
            0.0
        });
        per_class.push(ClassStat {
            sensitivity,
            specificity,
        });
    }
    Ok(ClassMetrics {
        accuracy: conf.trace() as f64 / total as f64,
        per_class,
        warnings,
    })
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den != 0).then(|| num as f64 / den as f64)
}
