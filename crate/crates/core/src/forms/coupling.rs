use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::thresholds::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Indicator,
}

/// Cut-off profile θ of range b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerProfile {
    pub kind: ProfileKind,
    pub b: f64,
}

impl RegularizerProfile {
    pub fn indicator(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return domain(format!("profile range must be positive, got {b}"));
        }
        Ok(RegularizerProfile { kind: ProfileKind::Indicator, b })
    }

    pub fn theta(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Indicator => {
                if r < self.b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// α̃(r) = α + (N−1)γ(θ(r)−1)/r.
pub fn alpha_tilde(r: f64, params: &PhysicalParams, profile: &RegularizerProfile) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("alpha_tilde needs r > 0, got {r}"));
    }
    params.validate()?;
    Ok(params.alpha + (params.n - 1) as f64 * params.gamma * (profile.theta(r) - 1.0) / r)
}

/// β_i = α + γ Σ_{j≠i} θ(|x_j−x₀|)/|x_j−x₀|.
///
/// `positions[0]` is the impurity and `positions[1..=N]` the bosons; `i` is
/// a boson index in 1..=N.
pub fn running_coupling(
    positions: &[[f64; 3]],
    i: usize,
    params: &PhysicalParams,
    profile: &RegularizerProfile,
) -> Result<f64> {
    params.validate()?;
    if positions.len() != params.n as usize + 1 {
        return domain(format!(
            "expected {} positions (impurity + N bosons), got {}",
            params.n + 1,
            positions.len()
        ));
    }
    if i == 0 || i > params.n as usize {
        return domain(format!("boson index must lie in 1..={}, got {i}", params.n));
    }
    let x0 = positions[0];
    let mut sum = 0.0;
    for (j, xj) in positions.iter().enumerate().skip(1) {
        if j == i {
            continue;
        }
        let d = ((xj[0] - x0[0]).powi(2) + (xj[1] - x0[1]).powi(2) + (xj[2] - x0[2]).powi(2)).sqrt();
        if d == 0.0 {
            return domain(format!("boson {j} coincides with the impurity"));
        }
        sum += profile.theta(d) / d;
    }
    Ok(params.alpha + params.gamma * sum)
}
