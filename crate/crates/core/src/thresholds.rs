//! Critical couplings, stability constants and the spectral shift λ₀.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{check_gamma, check_mass, s_off_one_at_zero, DerivedMasses};
use crate::quad::{integrate, QuadratureSpec};
use crate::specfun::{hyp2f1_conj, legendre_p_unchecked, HyperParams};

/// The model tuple (N, M, γ, α, b, λ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub b: f64,
    pub lambda: f64,
}

impl PhysicalParams {
    pub fn new(n: u32, m: f64, gamma: f64, alpha: f64, b: f64, lambda: f64) -> Result<Self> {
        let p = PhysicalParams { n, m, gamma, alpha, b, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        check_mass(self.m)?;
        check_gamma(self.gamma)?;
        if !self.alpha.is_finite() {
            return domain("alpha must be finite");
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return domain(format!("b must be positive, got {}", self.b));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return domain(format!("lambda must be positive, got {}", self.lambda));
        }
        Ok(())
    }

    pub fn gamma_c(&self) -> f64 {
        gamma_crit(self.n, self.m).expect("validated params")
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams { n: 2, m: 1.0, gamma: 0.5, alpha: 0.0, b: 1.0, lambda: 1.0 }
    }
}

pub(crate) fn check_n(n: u32) -> Result<()> {
    if n < 2 {
        return domain(format!("need N >= 2 bosons, got {n}"));
    }
    Ok(())
}

fn check_even(ell: u32) -> Result<()> {
    if ell % 2 != 0 {
        return domain(format!("only even ell is defined here, got {ell}"));
    }
    Ok(())
}

/// Critical coupling of the three-boson-plus-impurity problem with identical
/// bosons, kept for comparison.
pub fn three_boson_gamma_c() -> f64 {
    4.0 / 3.0 - 3f64.sqrt() / PI
}

// (N−1)(M+1)/√(M(M+2))
fn mass_factor(n: u32, m: f64) -> f64 {
    (n - 1) as f64 / DerivedMasses::new(m).expect("checked mass").sqrt_mu_over_eta()
}

/// γ_c = (2(M+1)/π)·asin(1/(M+1)) − 2√(M(M+2))/(π(N−1)(M+1)).
pub fn gamma_crit(n: u32, m: f64) -> Result<f64> {
    check_n(n)?;
    check_mass(m)?;
    Ok(gamma_ell_one(0, m)? - gamma_ell_two(0, n, m)?)
}

/// sup over M of γ_c.
pub fn gamma_crit_limit_small_mass(n: u32) -> Result<f64> {
    check_n(n)?;
    Ok(1.0)
}

/// inf over M of γ_c, (2/π)(N−2)/(N−1).
pub fn gamma_crit_limit_large_mass(n: u32) -> Result<f64> {
    check_n(n)?;
    Ok(2.0 / PI * (n - 2) as f64 / (n - 1) as f64)
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// ∫_{−1}^{1} P_ℓ(y)/√(1−y²) dy = π ℓ!² / (2^{2ℓ} (ℓ/2)!⁴) for even ℓ.
pub fn legendre_arcsine_moment(ell: u32) -> Result<f64> {
    check_even(ell)?;
    let l = ell as f64;
    Ok(PI * (2.0 * ln_factorial(ell) - 2.0 * l * std::f64::consts::LN_2 - 4.0 * ln_factorial(ell / 2)).exp())
}

/// γ^ℓ_M as the ratio of Legendre-weighted integrals; the numerator is
/// integrated numerically.
pub fn gamma_ell(ell: u32, n: u32, m: f64) -> Result<f64> {
    gamma_ell_with(ell, n, m, &QuadratureSpec::default())
}

pub fn gamma_ell_with(ell: u32, n: u32, m: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_even(ell)?;
    check_n(n)?;
    let dm = DerivedMasses::new(m)?;
    let x = 1.0 / (m + 1.0);
    let num = integrate(
        |y| legendre_p_unchecked(ell, y) / (1.0 - x * x * y * y).sqrt(),
        0.0,
        1.0,
        quad,
    )?
    .value
        * 2.0;
    let den = legendre_arcsine_moment(ell)?;
    Ok((num - 2.0 / (n - 1) as f64 * dm.sqrt_mu_over_eta()) / den)
}

/// γ^ℓ_{M,1} in closed form through ₂F₁ at p = 0.
pub fn gamma_ell_one(ell: u32, m: f64) -> Result<f64> {
    check_even(ell)?;
    check_mass(m)?;
    let x = 1.0 / (m + 1.0);
    let l = ell as f64;
    let f = hyp2f1_conj(HyperParams::new(ell, 0.0, x)?)?;
    let ln_c = (2.0 * l + 1.0) * std::f64::consts::LN_2 + ln_factorial(ell) + 2.0 * ln_factorial(ell / 2)
        - PI.ln()
        - ln_factorial(2 * ell + 1)
        + l * x.ln();
    Ok(ln_c.exp() * f)
}

/// γ^ℓ_{M,2}, so that γ^ℓ_M = γ^ℓ_{M,1} − γ^ℓ_{M,2}.
pub fn gamma_ell_two(ell: u32, n: u32, m: f64) -> Result<f64> {
    check_n(n)?;
    let dm = DerivedMasses::new(m)?;
    Ok(2.0 / (n - 1) as f64 * dm.sqrt_mu_over_eta() / legendre_arcsine_moment(ell)?)
}

/// γ̄^ℓ_M = 2^{ℓ+1}(ℓ/2)!²/(π ℓ! (M+1)^ℓ) ∫₀¹ u^ℓ/√(1−x²u²) du.
pub fn gamma_bar(ell: u32, m: f64) -> Result<f64> {
    check_even(ell)?;
    check_mass(m)?;
    let x = 1.0 / (m + 1.0);
    let l = ell as f64;
    let integral = integrate(
        |u| u.powi(ell as i32) / (1.0 - x * x * u * u).sqrt(),
        0.0,
        1.0,
        &QuadratureSpec::default(),
    )?
    .value;
    let ln_c = (l + 1.0) * std::f64::consts::LN_2 + 2.0 * ln_factorial(ell / 2)
        - PI.ln()
        - ln_factorial(ell)
        + l * x.ln();
    Ok(ln_c.exp() * integral)
}

fn check_supercritical(n: u32, m: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let gamma_c = gamma_crit(n, m)?;
    if gamma <= gamma_c {
        return Err(Error::Subcritical { gamma, gamma_c });
    }
    Ok(gamma_c)
}

/// Λ_γ = min{1, (π(N−1)/2)((M+1)/√(M(M+2)))(γ−γ_c)}.
pub fn lambda_big(n: u32, m: f64, gamma: f64) -> Result<f64> {
    let gamma_c = check_supercritical(n, m, gamma)?;
    Ok((0.5 * PI * mass_factor(n, m) * (gamma - gamma_c)).min(1.0))
}

/// Λ′_γ = 1 + ((N−1)(M+1)/√(M(M+2)))·max{πγ/2, ½S_off;1(0) + 2γ/π}.
pub fn lambda_prime(n: u32, m: f64, gamma: f64) -> Result<f64> {
    check_n(n)?;
    check_mass(m)?;
    check_gamma(gamma)?;
    let branch = (0.5 * PI * gamma).max(0.5 * s_off_one_at_zero(m)? + 2.0 * gamma / PI);
    Ok(1.0 + mass_factor(n, m) * branch)
}

/// Cruder continuity constant 1 + ((N−1)(M+1)/√(M(M+2)))((M+1)/M + πγ/2).
pub fn lambda_prime_crude(n: u32, m: f64, gamma: f64) -> Result<f64> {
    check_n(n)?;
    check_mass(m)?;
    check_gamma(gamma)?;
    Ok(1.0 + mass_factor(n, m) * ((m + 1.0) / m + 0.5 * PI * gamma))
}

/// λ₀, piecewise in the sign of α.
pub fn lambda_zero(params: &PhysicalParams) -> Result<f64> {
    params.validate()?;
    let lam = lambda_big(params.n, params.m, params.gamma)?;
    let mu = DerivedMasses::new(params.m)?.mu;
    let g = (params.n - 1) as f64 * params.gamma;
    let num = if params.alpha >= 0.0 { g } else { g + params.alpha.abs() * params.b };
    Ok(num * num / (mu * lam * lam * params.b * params.b))
}

/// Admissible s*-interval (lo, 1); identical for every ℓ.
pub fn s_star_interval(_ell: u32, n: u32, m: f64, gamma: f64) -> Result<(f64, f64)> {
    check_supercritical(n, m, gamma)?;
    let g1 = gamma_ell_one(0, m)?;
    let lo = (0.5 * PI * mass_factor(n, m) * (g1 - gamma)).max(0.0);
    Ok((lo, 1.0))
}

/// Scalar lower and upper factors of the Φ^λ sandwich.
pub fn phi_bound_factors(params: &PhysicalParams) -> Result<(f64, f64)> {
    params.validate()?;
    let lam = lambda_big(params.n, params.m, params.gamma)?;
    let lam_p = lambda_prime(params.n, params.m, params.gamma)?;
    let mu = DerivedMasses::new(params.m)?.mu;
    let g = (params.n - 1) as f64 * params.gamma;
    let ab = params.alpha * params.b;
    let scale = params.b * (params.lambda * mu).sqrt();
    Ok((lam - g.max(g - ab) / scale, lam_p + g.max(g + ab) / scale))
}

/// All threshold quantities at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub gamma_c: f64,
    pub lambda_big: f64,
    pub lambda_prime: f64,
    pub lambda_zero: f64,
    pub s_star_lo: f64,
    pub s_star_hi: f64,
}

impl ThresholdSet {
    pub fn compute(params: &PhysicalParams) -> Result<Self> {
        params.validate()?;
        let (lo, hi) = s_star_interval(0, params.n, params.m, params.gamma)?;
        Ok(ThresholdSet {
            gamma_c: gamma_crit(params.n, params.m)?,
            lambda_big: lambda_big(params.n, params.m, params.gamma)?,
            lambda_prime: lambda_prime(params.n, params.m, params.gamma)?,
            lambda_zero: lambda_zero(params)?,
            s_star_lo: lo,
            s_star_hi: hi,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_crit_examples() {
        let g = gamma_crit(2, 1.0).unwrap();
        assert_relative_eq!(g, 2.0 / 3.0 - 3f64.sqrt() / PI, epsilon = 1e-15);
        assert_eq!(format!("{g:.3}"), "0.115");
        assert!(gamma_crit(2, 1e8).unwrap() < 1e-7);
        assert!(gamma_crit(5, 1e-8).unwrap() > 0.999);
        assert!(gamma_crit(1, 1.0).is_err());
    }

    #[test]
    fn gamma_ell_examples() {
        assert_relative_eq!(gamma_ell(0, 2, 1.0).unwrap(), gamma_crit(2, 1.0).unwrap(), epsilon = 1e-13);
        assert!(gamma_ell(2, 2, 1.0).unwrap() < gamma_ell(0, 2, 1.0).unwrap());
        assert_relative_eq!(gamma_ell(0, 3, 1.0).unwrap(), gamma_crit(3, 1.0).unwrap(), epsilon = 1e-13);
        assert!(gamma_ell(1, 2, 1.0).is_err());
        for ell in [0, 2, 4, 8] {
            let via_parts = gamma_ell_one(ell, 0.7).unwrap() - gamma_ell_two(ell, 3, 0.7).unwrap();
            assert_relative_eq!(gamma_ell(ell, 3, 0.7).unwrap(), via_parts, epsilon = 1e-12);
        }
    }

    #[test]
    fn gamma_ell_one_examples() {
        assert_relative_eq!(gamma_ell_one(0, 1.0).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert!(gamma_ell_one(2, 1.0).unwrap() <= gamma_bar(2, 1.0).unwrap());
        assert_relative_eq!(gamma_ell_one(0, 1e-12).unwrap(), 1.0, epsilon = 1e-6);
        assert_relative_eq!(gamma_bar(0, 1.0).unwrap(), 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn arcsine_moments() {
        assert_relative_eq!(legendre_arcsine_moment(0).unwrap(), PI, epsilon = 1e-15);
        assert_relative_eq!(legendre_arcsine_moment(2).unwrap(), PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn lambda_big_examples() {
        let (n, m) = (3, 0.4);
        let gc = gamma_crit(n, m).unwrap();
        let edge = gc + 2.0 * (m * (m + 2.0)).sqrt() / (PI * (n - 1) as f64 * (m + 1.0));
        assert_relative_eq!(lambda_big(n, m, edge).unwrap(), 1.0, epsilon = 1e-12);
        assert!(lambda_big(n, m, gc + 1e-9).unwrap() < 1e-8);
        assert_relative_eq!(lambda_big(2, 1.0, 0.5).unwrap(), 0.697_700_105_960_963_8, epsilon = 1e-13);
        assert!(matches!(lambda_big(2, 1.0, 0.1), Err(Error::Subcritical { .. })));
    }

    #[test]
    fn lambda_prime_examples() {
        let s1 = s_off_one_at_zero(1.0).unwrap();
        let g = 10.0;
        assert!(g >= PI / (PI * PI - 4.0) * s1);
        assert_relative_eq!(lambda_prime(2, 1.0, g).unwrap(), 1.0 + 2.0 / 3f64.sqrt() * 0.5 * PI * g, epsilon = 1e-12);
        assert_relative_eq!(lambda_prime(2, 1.0, 10.0).unwrap(), 19.137_993_642_342_18, epsilon = 1e-9);
        for &(n, m, g) in &[(2, 1.0, 0.01), (7, 0.1, 3.0), (3, 10.0, 0.2)] {
            let lp = lambda_prime(n, m, g).unwrap();
            assert!(lp >= 1.0);
            assert!(lp <= lambda_prime_crude(n, m, g).unwrap());
        }
    }

    #[test]
    fn lambda_zero_examples() {
        let p = PhysicalParams::default();
        assert_relative_eq!(lambda_zero(&p).unwrap(), 1.027_146_584_746_268, epsilon = 1e-12);
        let neg = PhysicalParams { alpha: -1.0, ..p };
        let ratio = lambda_zero(&neg).unwrap() / lambda_zero(&p).unwrap();
        assert_relative_eq!(ratio, (0.5f64 + 1.0).powi(2) / 0.25, epsilon = 1e-12);
        let gc = gamma_crit(2, 1.0).unwrap();
        let near = PhysicalParams { gamma: gc + 1e-6, ..p };
        assert!(lambda_zero(&near).unwrap() > 1e9);
    }

    #[test]
    fn s_star_examples() {
        assert_eq!(s_star_interval(0, 2, 1.0, 0.7).unwrap(), (0.0, 1.0));
        let (lo, hi) = s_star_interval(0, 2, 1.0, 0.4).unwrap();
        assert_relative_eq!(lo, 0.5 * PI * 2.0 / 3f64.sqrt() * (2.0 / 3.0 - 0.4), epsilon = 1e-14);
        assert_relative_eq!(lo, 0.4837, epsilon = 1e-4);
        assert_eq!(hi, 1.0);
        assert_eq!(s_star_interval(6, 2, 1.0, 0.4).unwrap(), (lo, hi));
        // lo = 1 − Λ_γ whenever Λ_γ < 1
        assert_relative_eq!(lo, 1.0 - lambda_big(2, 1.0, 0.4).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn phi_factors_examples() {
        let p = PhysicalParams::default();
        let l0 = lambda_zero(&p).unwrap();
        let (lower, upper) = phi_bound_factors(&PhysicalParams { lambda: l0, ..p }).unwrap();
        assert!(lower.abs() < 1e-14);
        assert!(upper > lower);
        let (lower4, _) = phi_bound_factors(&PhysicalParams { lambda: 4.0 * l0, ..p }).unwrap();
        assert_relative_eq!(lower4, lambda_big(2, 1.0, 0.5).unwrap() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn three_boson_constant_is_larger() {
        assert_relative_eq!(three_boson_gamma_c(), 0.782, epsilon = 1e-3);
        assert!(three_boson_gamma_c() > gamma_crit(2, 1.0).unwrap());
    }

    #[test]
    fn threshold_set() {
        let t = ThresholdSet::compute(&PhysicalParams::default()).unwrap();
        assert!(t.lambda_big > 0.0 && t.lambda_big <= 1.0 && t.lambda_prime >= 1.0);
        assert!(t.s_star_lo < t.s_star_hi);
    }
}
