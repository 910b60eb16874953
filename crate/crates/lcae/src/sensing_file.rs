//! Sensing matrix text file:
//!
//! ```text
//! m n d seed
//! r_0 r_1 … r_{d-1}      # rows holding the ones of column 0, ascending
//! …                      # one line per column, n lines in total
//! ```
//!
//! Row indices are zero-based. The seed is informational: the column lines
//! fully determine the matrix.

use std::fmt::Write as _;
use std::path::Path;

use lcae_core::SensingMatrix;

use crate::error::{format_err, io_err, parse_err, Result};

pub fn format_sensing(phi: &SensingMatrix) -> String {
    let mut s = format!(
        "{} {} {} {}\n",
        phi.m(),
        phi.n(),
        phi.ones_per_col(),
        phi.seed()
    );
    for j in 0..phi.n() {
        let rows: Vec<String> = phi.column(j).iter().map(|r| r.to_string()).collect();
        let _ = writeln!(s, "{}", rows.join(" "));
    }
    s
}

pub fn save_sensing(path: &Path, phi: &SensingMatrix) -> Result<()> {
    std::fs::write(path, format_sensing(phi)).map_err(io_err(path))
}

pub fn load_sensing(path: &Path) -> Result<SensingMatrix> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_sensing(path, &text)
}

pub fn parse_sensing(path: &Path, text: &str) -> Result<SensingMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| format_err(path, "empty sensing file"))?;
    let head: Vec<u64> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(path, 1, "header must be four integers: m n d seed"))?;
    let [m, n, d, seed] = head[..] else {
        return Err(parse_err(
            path,
            1,
            "header must be four integers: m n d seed",
        ));
    };
    let mut columns = Vec::with_capacity(n as usize);
    for (i, line) in lines {
        let rows: Vec<u32> = line
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| {
                parse_err(
                    path,
                    i as u64 + 1,
                    "row indices must be non-negative integers",
                )
            })?;
        columns.push(rows);
    }
    if columns.len() as u64 != n {
        return Err(format_err(
            path,
            format!("header declares {n} columns, found {}", columns.len()),
        ));
    }
    Ok(SensingMatrix::from_parts(
        m as usize, n as usize, d as usize, seed, &columns,
    )?)
}
