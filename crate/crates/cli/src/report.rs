//! Classification report: loss, top-1/3/5 (percent), kept-parameter ratio
//! R (percent), and parameter count, for the full (F) and pruned (P)
//! variants of a trained network.

use std::path::Path;

use eprune_core::nn::{Network, StateVector};
use eprune_core::data::Dataset;
use eprune_core::trainer::{evaluate, EvalRow};

use crate::error::CliError;

pub const REPORT_TOPK: [usize; 3] = [1, 3, 5];

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub variant: String,
    pub loss: f64,
    pub top1: f64,
    pub top3: f64,
    pub top5: f64,
    pub r_pct: f64,
    pub params: usize,
}

impl ReportRow {
    pub fn from_eval(variant: &str, eval: &EvalRow) -> Self {
        let pct = |k: usize| {
            eval.topk
                .iter()
                .find(|(kk, _)| *kk == k)
                .map(|(_, acc)| 100.0 * acc)
                .unwrap_or(f64::NAN)
        };
        Self {
            variant: variant.to_string(),
            loss: eval.loss,
            top1: pct(1),
            top3: pct(3),
            top5: pct(5),
            r_pct: 100.0 * eval.kept_ratio,
            params: eval.kept,
        }
    }
}

/// Evaluates the F (all-ones mask) and P (given mask) rows on a dataset.
pub fn f_p_rows(
    net: &Network,
    mask: &StateVector,
    data: &Dataset,
) -> Result<Vec<ReportRow>, CliError> {
    let ones = StateVector::ones(net.prunable_units());
    let full = evaluate(net, &ones, data, &REPORT_TOPK)?;
    let pruned = evaluate(net, mask, data, &REPORT_TOPK)?;
    Ok(vec![
        ReportRow::from_eval("F", &full),
        ReportRow::from_eval("P", &pruned),
    ])
}

pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("variant,loss,top1,top3,top5,r_pct,params\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.variant, r.loss, r.top1, r.top3, r.top5, r.r_pct, r.params
        ));
    }
    out
}

pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<(), CliError> {
    std::fs::write(path, render_csv(rows))
        .map_err(|e| CliError::io(&format!("report {}", path.display()), e))
}

/// Human-readable table for stdout.
pub fn render_table(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<8} {:>8} {:>7} {:>7} {:>7} {:>7} {:>9}\n",
        "variant", "loss", "top1", "top3", "top5", "R", "params"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:<8} {:>8.4} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>9}\n",
            r.variant, r.loss, r.top1, r.top3, r.top5, r.r_pct, r.params
        ));
    }
    out
}
