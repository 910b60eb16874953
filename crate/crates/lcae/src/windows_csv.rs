//! Window CSV: one window per line, `record_id,label,s_1,…,s_n`, no header.
//! Label −1 marks an unlabeled window. Samples use `.` as the decimal point
//! and are written in shortest round-trip form, so save→load is bit-exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use lcae_core::{Mat, WindowSet};

use crate::error::{format_err, io_err, parse_err, Result};

/// Reads a window file. With `num_classes`, labels must be below it.
pub fn load_windows_csv(
    path: &Path,
    sample_rate_hz: f64,
    num_classes: Option<usize>,
) -> Result<WindowSet> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut data = Vec::new();
    let mut width: Option<usize> = None;
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() < 3 {
            return Err(parse_err(
                path,
                line,
                "expected record_id,label and at least one sample",
            ));
        }
        let n = rec.len() - 2;
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(parse_err(
                    path,
                    line,
                    format!("ragged row: {n} samples, earlier rows have {w}"),
                ))
            }
            _ => {}
        }
        let label: i64 = rec[1]
            .parse()
            .map_err(|_| parse_err(path, line, format!("label {:?} is not an integer", &rec[1])))?;
        if label < -1 {
            return Err(parse_err(path, line, format!("label {label} below -1")));
        }
        if let Some(c) = num_classes {
            if label >= c as i64 {
                return Err(parse_err(
                    path,
                    line,
                    format!("label {label} outside 0..{c}"),
                ));
            }
        }
        for (k, field) in rec.iter().skip(2).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                parse_err(
                    path,
                    line,
                    format!("sample {} ({field:?}) is not a number", k + 1),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    line,
                    format!("sample {} is not finite", k + 1),
                ));
            }
            data.push(v);
        }
        ids.push(rec[0].to_string());
        labels.push(label);
    }
    let Some(n) = width else {
        return Err(format_err(path, "no windows"));
    };
    let x = Mat::from_col_major(n, ids.len(), data)?;
    Ok(WindowSet::new(x, labels, sample_rate_hz, ids)?)
}

/// Writes columns of `x` as window rows.
pub fn save_windows_csv(path: &Path, ids: &[String], labels: &[i64], x: &Mat) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_windows(&mut w, ids, labels, x).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn write_windows(
    w: &mut impl Write,
    ids: &[String],
    labels: &[i64],
    x: &Mat,
) -> std::io::Result<()> {
    for c in 0..x.cols() {
        write!(w, "{},{}", ids[c], labels[c])?;
        for v in x.col(c) {
            write!(w, ",{v:?}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
