//! CSV and JSON artifacts for table runs.
//!
//! CSV is UTF-8 with dot decimal separators and LF line endings; the JSON
//! artifact carries the same rows so the two files agree number for
//! number. `q1`/`q3` are the bootstrap-distance quartiles.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use ustat_boot_core::experiments::ExperimentCell;

pub const CSV_HEADER: &str = "n,l,scheme,mean_d_boot,mean_d_norm,median_d_boot,\
median_d_norm,q1,q3,outliers_boot,outliers_norm,reps,seed";

/// One emitted table row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub l: usize,
    pub scheme: String,
    pub mean_d_boot: f64,
    pub mean_d_norm: f64,
    pub median_d_boot: f64,
    pub median_d_norm: f64,
    pub q1: f64,
    pub q3: f64,
    pub outliers_boot: usize,
    pub outliers_norm: usize,
    pub reps: usize,
    pub seed: u64,
}

impl TableRow {
    pub fn from_cell(cell: &ExperimentCell, seed: u64) -> Self {
        TableRow {
            n: cell.n,
            l: cell.block_length,
            scheme: cell.scheme.label().to_string(),
            mean_d_boot: cell.boot_summary.mean,
            mean_d_norm: cell.norm_summary.mean,
            median_d_boot: cell.boot_summary.median,
            median_d_norm: cell.norm_summary.median,
            q1: cell.boot_summary.q1,
            q3: cell.boot_summary.q3,
            outliers_boot: cell.boot_summary.outliers,
            outliers_norm: cell.norm_summary.outliers,
            reps: cell.reps,
            seed,
        }
    }
}

pub fn write_csv(rows: &[TableRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.l,
            r.scheme,
            r.mean_d_boot,
            r.mean_d_norm,
            r.median_d_boot,
            r.median_d_norm,
            r.q1,
            r.q3,
            r.outliers_boot,
            r.outliers_norm,
            r.reps,
            r.seed
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TableArtifact {
    pub rows: Vec<TableRow>,
}

pub fn write_json(rows: &[TableRow]) -> String {
    let artifact = TableArtifact {
        rows: rows.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&artifact).expect("rows serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> TableRow {
        TableRow {
            n: 100,
            l: 5,
            scheme: "circular".into(),
            mean_d_boot: 0.076,
            mean_d_norm: 0.091,
            median_d_boot: 0.07,
            median_d_norm: 0.085,
            q1: 0.05,
            q3: 0.09,
            outliers_boot: 2,
            outliers_norm: 11,
            reps: 1000,
            seed: 42,
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let text = write_csv(&[row()]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "100,5,circular,0.076,0.091,0.07,0.085,0.05,0.09,2,11,1000,42"
        );
        assert!(lines.next().is_none());
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_and_json_carry_identical_numbers() {
        let rows = vec![row()];
        let json: TableArtifact = serde_json::from_str(&write_json(&rows)).unwrap();
        let csv = write_csv(&rows);
        let line = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        let j = &json.rows[0];
        assert_eq!(fields[0].parse::<usize>().unwrap(), j.n);
        assert_eq!(fields[3].parse::<f64>().unwrap(), j.mean_d_boot);
        assert_eq!(fields[4].parse::<f64>().unwrap(), j.mean_d_norm);
        assert_eq!(fields[7].parse::<f64>().unwrap(), j.q1);
        assert_eq!(fields[10].parse::<usize>().unwrap(), j.outliers_norm);
    }
}
