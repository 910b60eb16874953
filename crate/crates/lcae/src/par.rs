//! Column-chunked parallelism for batch work whose output columns depend
//! only on the matching input columns, so any thread count gives
//! bitwise-identical results.

use lcae_core::Mat;

use crate::error::Result;

/// Splits `x` into up to `threads` contiguous column blocks, applies `f` to
/// each on its own scoped thread and concatenates the results in order.
pub fn map_columns<F>(threads: usize, x: &Mat, f: F) -> Result<Mat>
where
    F: Fn(&Mat) -> Result<Mat> + Sync,
{
    let n = x.cols();
    let t = threads.clamp(1, n.max(1));
    if t == 1 {
        return f(x);
    }
    let bounds: Vec<(usize, usize)> = (0..t).map(|i| (i * n / t, (i + 1) * n / t)).collect();
    let parts: Vec<Result<Mat>> = std::thread::scope(|s| {
        let handles: Vec<_> = bounds
            .iter()
            .map(|&(a, b)| {
                let f = &f;
                s.spawn(move || f(&x.cols_range(a, b)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let mut out: Option<Mat> = None;
    for p in parts {
        let p = p?;
        out = Some(match out {
            None => p,
            Some(acc) => acc.hcat(&p)?,
        });
    }
    Ok(out.expect("at least one block"))
}
