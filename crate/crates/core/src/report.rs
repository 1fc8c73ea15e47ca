use std::fmt;

use serde::{Deserialize, Serialize};

/// Outcome of one numerically verified inequality or identity.
///
/// `margin` is oriented so that a non-negative value means the check holds;
/// `passed` is exactly `margin >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub context: String,
}

impl BoundReport {
    /// Check `lhs <= rhs` up to `tolerance`.
    pub fn upper(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::with_margin(name, lhs, rhs, rhs - lhs, tolerance)
    }

    /// Check `|lhs - rhs| <= tolerance`.
    pub fn equal(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        // margin = tolerance - |diff| shifted so that passed <=> |diff| <= tolerance
        let margin = -(lhs - rhs).abs();
        Self::with_margin(name, lhs, rhs, margin, tolerance)
    }

    pub fn with_margin(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        margin: f64,
        tolerance: f64,
    ) -> Self {
        let passed = margin >= -tolerance;
        BoundReport {
            name: name.into(),
            lhs,
            rhs,
            margin,
            tolerance,
            passed,
            context: String::new(),
        }
    }

    pub fn context(mut self, context: impl Into<String>) -> Self {
        self.context = context.into();
        self
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: lhs={:.12e} rhs={:.12e} margin={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.lhs,
            self.rhs,
            self.margin,
            self.tolerance
        )?;
        if !self.context.is_empty() {
            write!(f, " ({})", self.context)?;
        }
        Ok(())
    }
}
