//! Argument grids, sweeps, and the output sink.

use std::path::PathBuf;

use clap::ValueEnum;

use crate::commands::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Parse `"a:b:n"` (linear) or `"a:b:nlog"` (log-spaced) into n points.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::usage(format!("grid must be 'a:b:n' or 'a:b:nlog', got '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let (count_text, log) = match parts[2].strip_suffix("log") {
        Some(stripped) => (stripped, true),
        None => (parts[2], false),
    };
    let n: usize = count_text.parse().map_err(|_| bad())?;
    if n < 2 || !a.is_finite() || !b.is_finite() || a >= b {
        return Err(bad());
    }
    if log && a <= 0.0 {
        return Err(Failure::usage(format!(
            "log grid needs a positive start, got {a}"
        )));
    }
    let mut grid = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        grid.push(if log {
            a * (b / a).powf(t)
        } else {
            a + (b - a) * t
        });
    }
    Ok(grid)
}

/// Parse a comma-separated list of positive scales.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>, Failure> {
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(Failure::usage("scale sweep must not be empty"));
    }
    let mut sweep = Vec::with_capacity(items.len());
    for item in items {
        let v: f64 = item
            .parse()
            .map_err(|_| Failure::usage(format!("sweep entry '{item}' is not a number")))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Failure::usage(format!(
                "sweep entries must be positive, got {item}"
            )));
        }
        sweep.push(v);
    }
    Ok(sweep)
}

/// Where a report goes: a file (written atomically) or stdout.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Sink { path }
    }

    pub fn write(&self, text: &str) -> Result<(), Failure> {
        match &self.path {
            Some(path) => radsob::report::write_atomic(path, text).map_err(|e| Failure {
                code: 2,
                message: format!("cannot write {}: {e}", path.display()),
            }),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}
