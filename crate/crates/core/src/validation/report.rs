use serde::{Deserialize, Serialize};

/// One acceptance measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CriterionReport {
    /// Passes when `measured ≤ threshold`.
    pub fn at_most(criterion: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { criterion: criterion.into(), measured, threshold, passed: measured <= threshold }
    }

    /// Passes when `measured ≥ threshold`.
    pub fn at_least(criterion: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { criterion: criterion.into(), measured, threshold, passed: measured >= threshold }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
