use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// One analytic piece of a radial profile ψ(k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileTerm {
    /// c·e^{−βk²}
    Gaussian { c: f64, beta: f64 },
    /// c·kⁿ·e^{−βk²}
    PolyGaussian { c: f64, n: u32, beta: f64 },
    /// c·exp(−((ln k − center)/width)²)/k²
    LogGaussian { c: f64, center: f64, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeFamily {
    Gaussian,
    PolyGaussian,
    LogGaussian,
    Mixed,
}

impl ProfileTerm {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ProfileTerm::Gaussian { c, beta } | ProfileTerm::PolyGaussian { c, beta, .. } => {
                c.is_finite() && beta > 0.0 && beta.is_finite()
            }
            ProfileTerm::LogGaussian { c, center, width } => {
                c.is_finite() && center.is_finite() && width > 0.0 && width.is_finite()
            }
        };
        if !ok {
            return domain(format!("invalid profile term {self:?}"));
        }
        Ok(())
    }

    fn eval(&self, k: f64) -> f64 {
        match *self {
            ProfileTerm::Gaussian { c, beta } => c * (-beta * k * k).exp(),
            ProfileTerm::PolyGaussian { c, n, beta } => c * k.powi(n as i32) * (-beta * k * k).exp(),
            ProfileTerm::LogGaussian { c, center, width } => {
                let z = (k.ln() - center) / width;
                c * (-z * z).exp() / (k * k)
            }
        }
    }

    /// e^{2t}ψ(e^t) for this term, evaluated without forming e^t for large |t|.
    fn mellin_weight(&self, t: f64) -> f64 {
        match *self {
            ProfileTerm::LogGaussian { c, center, width } => {
                let z = (t - center) / width;
                c * (-z * z).exp()
            }
            _ => {
                let k = t.exp();
                k * k * self.eval(k)
            }
        }
    }

    /// Interval in ln k outside which k⁴ψ(k)² is below e^{−80} of its scale.
    fn log_support(&self) -> (f64, f64) {
        match *self {
            ProfileTerm::Gaussian { beta, .. } => (-20.0, 0.5 * (40.0 / beta).ln()),
            ProfileTerm::PolyGaussian { n, beta, .. } => {
                let hi = 0.5 * ((40.0 + n as f64 * 2.0) / beta).ln() + 0.5;
                (-20.0 / (1.0 + 0.5 * n as f64), hi)
            }
            ProfileTerm::LogGaussian { center, width, .. } => (center - 7.0 * width, center + 7.0 * width),
        }
    }

    fn family(&self) -> ChargeFamily {
        match self {
            ProfileTerm::Gaussian { .. } => ChargeFamily::Gaussian,
            ProfileTerm::PolyGaussian { .. } => ChargeFamily::PolyGaussian,
            ProfileTerm::LogGaussian { .. } => ChargeFamily::LogGaussian,
        }
    }
}

/// ψ(k) = Σ terms, the radial part of one (ℓ, m) partial wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCharge {
    pub terms: Vec<ProfileTerm>,
    pub ell: u32,
    pub m: i32,
}

impl RadialCharge {
    pub fn new(terms: Vec<ProfileTerm>, ell: u32, m: i32) -> Result<Self> {
        let c = RadialCharge { terms, ell, m };
        c.validate()?;
        Ok(c)
    }

    pub fn gaussian(beta: f64, ell: u32) -> Self {
        RadialCharge { terms: vec![ProfileTerm::Gaussian { c: 1.0, beta }], ell, m: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.unsigned_abs() > self.ell {
            return domain(format!("|m| = {} exceeds ell = {}", self.m.abs(), self.ell));
        }
        self.terms.iter().try_for_each(ProfileTerm::validate)
    }

    pub fn family(&self) -> ChargeFamily {
        let mut it = self.terms.iter().map(ProfileTerm::family);
        match it.next() {
            None => ChargeFamily::Gaussian,
            Some(f) => {
                if it.all(|g| g == f) {
                    f
                } else {
                    ChargeFamily::Mixed
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| match *t {
            ProfileTerm::Gaussian { c, .. } | ProfileTerm::PolyGaussian { c, .. } | ProfileTerm::LogGaussian { c, .. } => {
                c == 0.0
            }
        })
    }

    pub fn eval(&self, k: f64) -> f64 {
        if k <= 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|t| t.eval(k)).sum()
    }

    pub(crate) fn mellin_weight(&self, t: f64) -> f64 {
        self.terms.iter().map(|x| x.mellin_weight(t)).sum()
    }

    /// Range of u = ln k carrying the charge.
    pub(crate) fn log_support(&self) -> (f64, f64) {
        self.terms
            .iter()
            .map(ProfileTerm::log_support)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    /// Merge the terms of another charge with the same (ℓ, m).
    pub fn absorb(&mut self, other: &RadialCharge) {
        self.terms.extend_from_slice(&other.terms);
    }
}
