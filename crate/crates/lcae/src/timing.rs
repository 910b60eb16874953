//! Wall-clock comparison of two reconstructors on the same batch.

use std::time::Instant;

use lcae_core::Mat;

use crate::error::{Error, Result};

pub const MIN_REPETITIONS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct TimingReport {
    /// Median milliseconds per batch.
    pub ms_a: f64,
    pub ms_b: f64,
    /// `ms_b / ms_a`: how many times faster `a` is.
    pub ratio: f64,
    pub repetitions: usize,
}

/// Median wall-clock time of each reconstructor over at least five
/// repetitions (one untimed warm-up each). Runs on the calling thread.
pub fn timing_compare<A, B, R>(
    mut a: A,
    mut b: B,
    batch: &Mat,
    repetitions: usize,
) -> Result<TimingReport>
where
    A: FnMut(&Mat) -> R,
    B: FnMut(&Mat) -> R,
{
    if batch.cols() == 0 {
        return Err(Error::Invalid(
            "timing_compare needs a non-empty batch".into(),
        ));
    }
    let reps = repetitions.max(MIN_REPETITIONS);
    let ms_a = median_ms(&mut a, batch, reps);
    let ms_b = median_ms(&mut b, batch, reps);
    Ok(TimingReport {
        ms_a,
        ms_b,
        ratio: ms_b / ms_a.max(f64::MIN_POSITIVE),
        repetitions: reps,
    })
}

fn median_ms<F: FnMut(&Mat) -> R, R>(f: &mut F, batch: &Mat, reps: usize) -> f64 {
    std::hint::black_box(f(batch));
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f(std::hint::black_box(batch)));
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let mid = reps / 2;
    if reps % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    }
}
