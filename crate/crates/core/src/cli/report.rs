//! Per-method IQM tables over train output directories.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::metrics::{iqm, mean, median};

#[derive(Debug, Deserialize)]
struct CurveRow {
    step: u64,
    seed: u64,
    return_mean: f64,
}

/// Final and per-step returns of one method across its seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodColumn {
    pub name: String,
    /// Mean return at each seed's last evaluation, in seed order.
    pub final_returns: Vec<(u64, f64)>,
    /// IQM over seeds of the mean return at each evaluation step.
    pub step_iqm: BTreeMap<u64, f64>,
}

impl MethodColumn {
    pub fn final_values(&self) -> Vec<f64> {
        self.final_returns.iter().map(|&(_, r)| r).collect()
    }

    pub fn final_median(&self) -> f64 {
        median(&self.final_values())
    }

    pub fn final_iqm(&self) -> f64 {
        iqm(&self.final_values()).expect("every method has at least one seed")
    }

    pub fn final_mean(&self) -> f64 {
        mean(&self.final_values())
    }
}

/// Rows are metrics, columns are methods, so comparing a run with itself
/// gives identical columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareTable {
    pub methods: Vec<MethodColumn>,
}

/// Reads `<dir>/curve.csv` for every directory; the directory name labels
/// the method.
pub fn compare_runs(dirs: &[PathBuf]) -> Result<CompareTable> {
    let methods = dirs.iter().map(|d| read_method(d)).collect::<Result<_>>()?;
    Ok(CompareTable { methods })
}

fn read_method(dir: &Path) -> Result<MethodColumn> {
    let path = dir.join("curve.csv");
    let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut by_step: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut last: BTreeMap<u64, (u64, f64)> = BTreeMap::new();
    for row in csv::Reader::from_reader(file).deserialize::<CurveRow>() {
        let row = row.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        by_step.entry(row.step).or_default().push(row.return_mean);
        let entry = last.entry(row.seed).or_insert((row.step, row.return_mean));
        if row.step >= entry.0 {
            *entry = (row.step, row.return_mean);
        }
    }
    if last.is_empty() {
        return Err(Error::Format(format!("{} has no rows", path.display())));
    }
    let name = dir
        .file_name()
        .map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok(MethodColumn {
        name,
        final_returns: last.into_iter().map(|(seed, (_, r))| (seed, r)).collect(),
        step_iqm: by_step
            .into_iter()
            .map(|(step, rs)| (step, iqm(&rs).expect("non-empty step group")))
            .collect(),
    })
}

impl CompareTable {
    fn rows(&self) -> Vec<Vec<String>> {
        let mut header = vec!["metric".to_string()];
        header.extend(self.methods.iter().map(|m| m.name.clone()));
        let mut rows = vec![header];
        let mut push = |label: String, cell: &dyn Fn(&MethodColumn) -> String| {
            let mut row = vec![label];
            row.extend(self.methods.iter().map(cell));
            rows.push(row);
        };
        push("n_seeds".into(), &|m| m.final_returns.len().to_string());
        push("final_iqm".into(), &|m| format!("{:.4}", m.final_iqm()));
        push("final_median".into(), &|m| format!("{:.4}", m.final_median()));
        push("final_mean".into(), &|m| format!("{:.4}", m.final_mean()));
        let steps: std::collections::BTreeSet<u64> =
            self.methods.iter().flat_map(|m| m.step_iqm.keys().copied()).collect();
        for step in steps {
            push(format!("iqm@{step}"), &|m| {
                m.step_iqm.get(&step).map_or_else(String::new, |v| format!("{v:.4}"))
            });
        }
        rows
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.rows() {
            w.write_record(&row).map_err(|e| Error::Format(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(format!("csv: {}", e.error())))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Right-aligned columns separated by two spaces.
    pub fn to_text(&self) -> String {
        let rows = self.rows();
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (cell, &w))| if j == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
