//! Residual statistics shared by every verification routine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of checking one identity over a set of samples.
/// `passed` holds exactly when `max_residual < tolerance`; a NaN residual fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub structure: String,
    pub samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seed: u64,
    pub parameters: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn from_residuals(
        identity: impl Into<String>,
        structure: impl Into<String>,
        residuals: &[f64],
        tolerance: f64,
        seed: u64,
    ) -> Self {
        let max = residuals.iter().fold(0.0f64, |m, &r| if r.is_nan() || m.is_nan() { f64::NAN } else { m.max(r) });
        let mean = if residuals.is_empty() { 0.0 } else { residuals.iter().sum::<f64>() / residuals.len() as f64 };
        Self {
            identity: identity.into(),
            structure: structure.into(),
            samples: residuals.len(),
            max_residual: max,
            mean_residual: mean,
            tolerance,
            passed: max < tolerance,
            seed,
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_tracks_max() {
        let r = VerificationReport::from_residuals("x", "s", &[1e-10, 3e-9], 1e-8, 0);
        assert!(r.passed);
        assert_eq!(r.max_residual, 3e-9);
        let r = VerificationReport::from_residuals("x", "s", &[1e-10, f64::NAN, 0.0], 1e-8, 0);
        assert!(!r.passed);
        let r = VerificationReport::from_residuals("x", "s", &[1e-8], 1e-8, 0);
        assert!(!r.passed);
    }
}
