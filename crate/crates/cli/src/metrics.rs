//! metrics.csv emission: one row per epoch, fixed header.
//!
//! Floats are formatted with Rust's shortest round-trip representation, so
//! identical runs produce byte-identical files regardless of worker count.

use std::fmt::Write as _;
use std::path::Path;

use eprune_core::trainer::RunMetrics;

use crate::error::CliError;

pub fn render_metrics(metrics: &RunMetrics) -> String {
    let mut out = String::new();
    let mut header = String::from(
        "epoch,phase,train_loss,best_energy,mean_energy,delta_s,kept_pct,mask_hash,energy_evals",
    );
    for k in &metrics.topk {
        write!(header, ",train_top{k}").unwrap();
    }
    for k in &metrics.topk {
        write!(header, ",test_top{k}").unwrap();
    }
    out.push_str(&header);
    out.push('\n');
    for row in &metrics.rows {
        write!(
            out,
            "{},{},{},{},{},{},{},{:016x},{}",
            row.epoch,
            row.phase,
            row.train_loss,
            row.best_energy,
            row.mean_energy,
            row.delta_s,
            100.0 * row.kept_ratio,
            row.mask_fingerprint,
            row.energy_evals
        )
        .unwrap();
        for v in &row.train_topk {
            write!(out, ",{}", 100.0 * v).unwrap();
        }
        for v in &row.test_topk {
            write!(out, ",{}", 100.0 * v).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_metrics(path: &Path, metrics: &RunMetrics) -> Result<(), CliError> {
    std::fs::write(path, render_metrics(metrics))
        .map_err(|e| CliError::io(&format!("metrics {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use eprune_core::trainer::{EpochRow, Phase};

    #[test]
    fn header_and_rows_are_stable() {
        let metrics = RunMetrics {
            topk: vec![1, 3],
            rows: vec![EpochRow {
                epoch: 1,
                phase: Phase::Search,
                train_loss: 0.5,
                best_energy: -1.25,
                mean_energy: -1.0,
                delta_s: -0.25,
                kept_ratio: 0.4375,
                mask_fingerprint: 0xabcd,
                energy_evals: 16,
                train_topk: vec![0.75, 1.0],
                test_topk: vec![0.5, 0.875],
            }],
        };
        let text = render_metrics(&metrics);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "epoch,phase,train_loss,best_energy,mean_energy,delta_s,kept_pct,mask_hash,energy_evals,train_top1,train_top3,test_top1,test_top3"
        );
        assert_eq!(
            lines.next().unwrap(),
            "1,search,0.5,-1.25,-1,-0.25,43.75,000000000000abcd,16,75,100,50,87.5"
        );
        assert_eq!(render_metrics(&metrics), text);
    }
}
