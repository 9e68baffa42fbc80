use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::qstate::C64;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// One checked instance: the inequality reads `lhs ≥ rhs`, and `margin`
/// is `lhs − rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub dim: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub trials: usize,
    pub tolerance: f64,
    /// Largest `rhs − lhs` seen; negative means every instance had slack.
    pub max_violation: f64,
    pub passed: bool,
    /// Inputs of the instance attaining `max_violation`.
    pub witness: Value,
    /// Quantities that are not one-sided margins (measured ε values,
    /// equality residuals).
    pub notes: Value,
    pub rows: Vec<TrialRow>,
}

impl InequalityReport {
    pub fn new(id: &str, tolerance: f64) -> Self {
        Self {
            id: id.into(),
            trials: 0,
            tolerance,
            max_violation: f64::NEG_INFINITY,
            passed: true,
            witness: Value::Null,
            notes: json!({}),
            rows: Vec::new(),
        }
    }

    /// Records `lhs ≥ rhs`; `witness` is built only for a new worst case.
    pub fn record(&mut self, dim: usize, lhs: f64, rhs: f64, witness: impl FnOnce() -> Value) {
        let violation = rhs - lhs;
        if violation > self.max_violation || self.rows.is_empty() {
            self.max_violation = violation;
            self.witness = witness();
        }
        self.rows.push(TrialRow {
            trial: self.trials,
            dim,
            lhs,
            rhs,
            margin: lhs - rhs,
        });
        self.trials += 1;
        self.passed = self.max_violation <= self.tolerance;
    }

    pub fn note(&mut self, key: &str, value: Value) {
        if let Value::Object(m) = &mut self.notes {
            m.insert(key.into(), value);
        }
    }

    pub fn verdict_line(&self) -> String {
        format!(
            "{} {}: trials={} max_violation={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.trials,
            self.max_violation,
            self.tolerance
        )
    }
}

/// Flat CSV with one row per trial across all reports.
pub fn reports_to_csv(reports: &[InequalityReport]) -> String {
    let mut out = String::from("id,trial,dim,lhs,rhs,margin\n");
    for r in reports {
        for row in &r.rows {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:e}\n",
                r.id, row.trial, row.dim, row.lhs, row.rhs, row.margin
            ));
        }
    }
    out
}

/// Matrix as nested `[re, im]` rows.
pub(crate) fn matrix_json(m: &DMatrix<C64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

pub(crate) fn vector_json(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|a| json!([a.re, a.im])).collect())
}
