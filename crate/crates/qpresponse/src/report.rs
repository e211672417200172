//! Flat key-value report trees.
//!
//! Reports are written as dotted-key `key = value` lines in a fixed order,
//! with every float at 17 significant digits, so identical runs produce
//! byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::solver::SolveReport;

#[derive(Clone, Debug, Default)]
pub struct ReportTree {
    entries: Vec<(String, String)>,
}

impl ReportTree {
    pub fn new() -> Self {
        ReportTree::default()
    }

    pub fn put_str(&mut self, key: &str, value: &str) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn put_int(&mut self, key: &str, value: i64) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn put_float(&mut self, key: &str, value: f64) {
        self.entries
            .push((key.to_string(), format!("{value:.16e}")));
    }

    pub fn put_complex(&mut self, key: &str, value: Complex64) {
        self.put_float(&format!("{key}.re"), value.re);
        self.put_float(&format!("{key}.im"), value.im);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

/// Parses a report tree back into a key -> raw-string map.
pub fn parse_tree(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("report line {}: missing '='", lineno + 1))
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn get_float(tree: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    tree.get(key)
        .ok_or_else(|| Error::InvalidInput(format!("report key {key} missing")))?
        .parse::<f64>()
        .map_err(|e| Error::InvalidInput(format!("report key {key}: {e}")))
}

pub fn get_int(tree: &BTreeMap<String, String>, key: &str) -> Result<i64> {
    tree.get(key)
        .ok_or_else(|| Error::InvalidInput(format!("report key {key} missing")))?
        .parse::<i64>()
        .map_err(|e| Error::InvalidInput(format!("report key {key}: {e}")))
}

/// Serializes a solve outcome into the report tree.
pub fn solve_report_tree(report: &SolveReport) -> ReportTree {
    let mut t = ReportTree::new();
    t.put_str("format", "qpr-report-v1");
    t.put_str("mode", report.mode.as_str());
    t.put_str("status", "converged");
    t.put_int("truncation", report.truncation as i64);
    t.put_float("norm.rho", report.norm_params.rho);
    t.put_float("norm.m", report.norm_params.m);
    t.put_int("leading.branch", report.branch_index as i64);
    t.put_float("leading.margin", report.mode_margin);
    t.put_int("leading.dim", report.a.len() as i64);
    for (i, ai) in report.a.iter().enumerate() {
        t.put_complex(&format!("leading.a.{i}"), *ai);
    }
    t.put_int("contraction.iterations", report.iterations as i64);
    t.put_float("contraction.lambda_hat", report.lambda_hat);
    t.put_float("contraction.ball_radius", report.ball_radius);
    t.put_int("contraction.halvings", report.halvings as i64);
    let steps = report
        .step_norms
        .iter()
        .map(|s| format!("{s:.16e}"))
        .collect::<Vec<_>>()
        .join(",");
    t.put_str("contraction.step_norms", &steps);
    t.put_float("contraction.fixed_point_defect", report.fixed_point_defect);
    t.put_float("norms.v", report.v_norm);
    if let Some(u) = report.u_norm {
        t.put_float("norms.u", u);
    }
    t.put_float("operator.truncated_norm", report.operator_norm);
    t.put_float("operator.norm_bound", report.operator_norm_bound);
    t.put_float("residual.sup", report.residual.sup);
    t.put_float("residual.l2", report.residual.l2);
    t.put_int("residual.samples", report.residual.samples as i64);
    t.put_str("residual.variant", report.residual.variant.as_str());
    t.put_float("tail.max", report.tail_max);
    if let Some((eta, gamma)) = report.diophantine {
        t.put_float("diophantine.eta", eta);
        t.put_float("diophantine.gamma", gamma);
    }
    t.put_int("warnings.count", report.warnings.len() as i64);
    for (i, w) in report.warnings.iter().enumerate() {
        t.put_str(&format!("warnings.{i}"), w);
    }
    t
}
