use serde::Serialize;
use serde_json::json;

use super::{
    averaged_problem, bounds_prop24, bounds_thm21, classify_fixed, AveragedProblem, Classification, Criterion,
    EigenBounds, Eigenfunction, FloquetOptions, Verdict,
};
use crate::error::Result;
use crate::scenario::Scenario;

/// Everything known about the principal eigenvalue of one fixed domain.
#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub length: f64,
    pub bounds: EigenBounds,
    pub extremal_bounds: EigenBounds,
    pub averaged: AveragedProblem,
    /// Extrapolated eigenvalue when available, otherwise `lambda_raw`.
    pub lambda: f64,
    pub lambda_raw: f64,
    pub lambda_extrapolated: Option<f64>,
    pub power_iterations: usize,
    #[serde(skip)]
    pub eigenfunction: Eigenfunction,
    /// Verdict from the closed-form criteria, falling back to the sign of
    /// `lambda` when they are inconclusive.
    pub classification: Classification,
}

pub fn eig_report(s: &Scenario, length: f64, opts: &FloquetOptions) -> Result<EigenReport> {
    let bounds = bounds_thm21(s, length)?;
    let extremal_bounds = bounds_prop24(s, length)?;
    let averaged = averaged_problem(s, length)?;
    let sol = super::floquet_lambda(s, length, opts)?;
    let mut classification = classify_fixed(s, length, s.r)?;
    if classification.verdict == Verdict::Unknown {
        classification.criterion = Criterion::NumericEigenvalue;
        classification.verdict = if sol.lambda > 0.0 {
            Verdict::Extinct
        } else {
            Verdict::Survive
        };
    }
    Ok(EigenReport {
        length,
        bounds,
        extremal_bounds,
        averaged,
        lambda: sol.lambda,
        lambda_raw: sol.lambda_raw,
        lambda_extrapolated: sol.lambda_extrapolated,
        power_iterations: sol.iterations,
        eigenfunction: sol.eigenfunction,
        classification,
    })
}

impl EigenReport {
    pub const CSV_HEADER: [&'static str; 12] = [
        "L",
        "lower",
        "upper",
        "upper_extremal",
        "mu_hat",
        "lambda_hat",
        "lambda",
        "lambda_raw",
        "lambda_extrapolated",
        "verdict",
        "criterion",
        "period_defect",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let criterion = serde_json::to_value(self.classification.criterion)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        vec![
            fmt(self.length),
            fmt(self.bounds.lower),
            fmt(self.bounds.upper),
            fmt(self.extremal_bounds.upper),
            fmt(self.averaged.mu_hat),
            fmt(self.averaged.lambda_hat),
            fmt(self.lambda),
            fmt(self.lambda_raw),
            self.lambda_extrapolated.map(fmt).unwrap_or_default(),
            self.classification.verdict.as_str().to_owned(),
            criterion,
            fmt(self.eigenfunction.period_defect()),
        ]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or_else(|_| json!({}));
        v["eigenfunction"] = json!({
            "nodes": self.eigenfunction.nodes(),
            "time_levels": self.eigenfunction.values.len(),
            "period_defect": self.eigenfunction.period_defect(),
        });
        v
    }
}

pub(crate) fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}
