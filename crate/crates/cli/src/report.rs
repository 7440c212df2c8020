//! Tabular experiment results with a lossless CSV form.
//!
//! A report is an ordered list of `key=value` metadata entries, a header
//! row, and numeric rows. The CSV serialization writes metadata as leading
//! `# key=value` comment lines and every value with 17 significant digits,
//! so parsing the file back reproduces the report bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    /// Ordered metadata; by convention the first entry is `("experiment", …)`.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Report {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Self {
            meta: vec![("experiment".to_string(), experiment.to_string())],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn experiment(&self) -> &str {
        self.meta
            .iter()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.as_str())
            .unwrap_or("")
    }

    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        assert!(
            !key.contains(['\n', '=']) && !value.contains('\n'),
            "metadata must be single-line and keys must not contain '='"
        );
        self.meta.push((key.to_string(), value));
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim_start();
                let (k, v) = rest
                    .split_once('=')
                    .with_context(|| format!("line {}: metadata without '='", lineno + 1))?;
                meta.push((k.to_string(), v.to_string()));
                continue;
            }
            match &columns {
                None => columns = Some(line.split(',').map(|c| c.to_string()).collect()),
                Some(cols) => {
                    let row: Vec<f64> = line
                        .split(',')
                        .map(|c| {
                            c.parse::<f64>()
                                .with_context(|| format!("line {}: bad number {c:?}", lineno + 1))
                        })
                        .collect::<Result<_>>()?;
                    if row.len() != cols.len() {
                        bail!("line {}: expected {} cells, got {}", lineno + 1, cols.len(), row.len());
                    }
                    rows.push(row);
                }
            }
        }
        let columns = columns.context("missing header row")?;
        Ok(Self { meta, columns, rows })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())
            .with_context(|| format!("writing report to {}", path.display()))?;
        Ok(())
    }

    /// Human-readable rendering for stdout; the CSV is the machine form.
    pub fn to_table(&self) -> String {
        fn cell(v: f64) -> String {
            if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
                format!("{v}")
            } else {
                format!("{v:.4e}")
            }
        }
        let mut grid: Vec<Vec<String>> = vec![self.columns.clone()];
        grid.extend(self.rows.iter().map(|r| r.iter().map(|&v| cell(v)).collect()));
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| grid.iter().map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k} = {v}");
        }
        for row in &grid {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            let _ = writeln!(s, "{}", line.join("  "));
        }
        s
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`; NaN when fewer
/// than two usable points.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if usable.len() < 2 {
        return f64::NAN;
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
