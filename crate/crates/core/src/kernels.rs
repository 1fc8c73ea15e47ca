//! Diagonalized partial-wave kernels S_off;ℓ(p) and S_reg;ℓ(p).

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_breaks, QuadratureSpec};
use crate::specfun::{legendre_p_unchecked, ln_cosh, ln_hyp2f1_conj, HyperParams};

/// |p| below this is treated as zero.
pub const P_ZERO: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEval {
    pub value: f64,
    pub abs_error: f64,
    pub method: KernelMethod,
}

/// Reduced mass μ = M/(M+1) and modified reduced mass η = (M+1)/(M+2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedMasses {
    pub mu: f64,
    pub eta: f64,
}

impl DerivedMasses {
    pub fn new(m: f64) -> Result<Self> {
        check_mass(m)?;
        Ok(DerivedMasses { mu: m / (m + 1.0), eta: (m + 1.0) / (m + 2.0) })
    }

    /// √(μ/η) = √(M(M+2))/(M+1), computed without cancellation.
    pub fn sqrt_mu_over_eta(&self) -> f64 {
        (self.mu / self.eta).sqrt()
    }
}

pub(crate) fn check_mass(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return domain(format!("mass ratio M must be positive and finite, got {m}"));
    }
    Ok(())
}

/// cosh(p a)/cosh(πp/2) for |a| ≤ π/2, overflow free.
pub(crate) fn cosh_ratio(p: f64, a: f64) -> f64 {
    let p = p.abs();
    if p < 1.0 {
        return (p * a).cosh() / (FRAC_PI_2 * p).cosh();
    }
    let e = (p * (a.abs() - FRAC_PI_2)).exp();
    e * (1.0 + (-2.0 * p * a.abs()).exp()) / (1.0 + (-PI * p).exp())
}

/// sinh(p a)/sinh(πp/2) with the limit 2a/π at p = 0.
pub(crate) fn sinh_ratio(p: f64, a: f64) -> f64 {
    let p = p.abs();
    if p < P_ZERO {
        return 2.0 * a / PI;
    }
    if p < 1.0 {
        return (p * a).sinh() / (FRAC_PI_2 * p).sinh();
    }
    let e = (p * (a.abs() - FRAC_PI_2)).exp();
    a.signum() * e * (-(-2.0 * p * a.abs()).exp_m1()) / (-(-PI * p).exp_m1())
}

// `layer`: width of the boundary layer at b, where the integrand concentrates for large p.
fn quad_eval(f: impl Fn(f64) -> f64, a: f64, b: f64, layer: f64, quad: &QuadratureSpec) -> Result<KernelEval> {
    quad.validate()?;
    let mut points = vec![a];
    for c in [256.0, 64.0, 16.0, 4.0, 1.0] {
        let t = b - c * layer;
        if t > *points.last().unwrap() && t < b {
            points.push(t);
        }
    }
    points.push(b);
    let r = integrate_breaks(f, &points, quad)?;
    Ok(KernelEval { value: r.value, abs_error: r.abs_error, method: KernelMethod::Quadrature })
}

/// S_off;ℓ(p) by quadrature over y ∈ [−1, 1].
///
/// Even ℓ: −∫ P_ℓ(y) cosh(p·asin(xy)) / (√(1−x²y²) cosh(πp/2)) dy;
/// odd ℓ: the same with sinh/sinh and no sign, x = 1/(M+1).
pub fn s_off(ell: u32, p: f64, m: f64, quad: &QuadratureSpec) -> Result<KernelEval> {
    check_mass(m)?;
    let x = 1.0 / (m + 1.0);
    // the integrand is even in y for both parities
    let even = ell % 2 == 0;
    let mut ev = quad_eval(
        |y| {
            let a = (x * y).asin();
            let w = legendre_p_unchecked(ell, y) / (1.0 - x * x * y * y).sqrt();
            if even {
                w * cosh_ratio(p, a)
            } else {
                w * sinh_ratio(p, a)
            }
        },
        0.0,
        1.0,
        (1.0 - x * x).sqrt() / (x * p.abs()),
        quad,
    )?;
    let sign = if even { -2.0 } else { 2.0 };
    ev.value *= sign;
    ev.abs_error *= 2.0;
    Ok(ev)
}

/// S_reg;ℓ(p) by quadrature, after y = sin u.
pub fn s_reg(ell: u32, p: f64, gamma: f64, quad: &QuadratureSpec) -> Result<KernelEval> {
    check_gamma(gamma)?;
    let even = ell % 2 == 0;
    let mut ev = quad_eval(
        |u| {
            let pl = legendre_p_unchecked(ell, u.sin());
            if even {
                pl * cosh_ratio(p, u)
            } else {
                pl * sinh_ratio(p, u)
            }
        },
        0.0,
        FRAC_PI_2,
        1.0 / p.abs(),
        quad,
    )?;
    ev.value *= 2.0 * gamma;
    ev.abs_error *= 2.0 * gamma;
    Ok(ev)
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return domain(format!("gamma must be positive and finite, got {gamma}"));
    }
    Ok(())
}

fn check_even(ell: u32) -> Result<()> {
    if ell % 2 != 0 {
        return domain(format!("closed form needs even ell, got {ell}"));
    }
    Ok(())
}

/// Closed form of S_off;ℓ(p) for even ℓ through the conjugate ₂F₁.
pub fn s_off_closed(ell: u32, p: f64, m: f64) -> Result<KernelEval> {
    check_even(ell)?;
    check_mass(m)?;
    let x = 1.0 / (m + 1.0);
    // |S_off;ℓ(p)| ≤ 4 e^{−|p|(π/2 − asin x)}/√(1−x²)
    let ln_bound = (4.0f64).ln() - p.abs() * (FRAC_PI_2 - x.asin()) - 0.5 * (1.0 - x * x).ln();
    if ln_bound < -700.0 {
        return Ok(KernelEval { value: 0.0, abs_error: ln_bound.exp(), method: KernelMethod::ClosedForm });
    }
    let l = ell as f64;
    let (ln_f, rel) = ln_hyp2f1_conj(&HyperParams::new(ell, p, x)?)?;
    let ln_fact: f64 = (1..=ell).map(|k| (k as f64).ln()).sum();
    let ln_fact2: f64 = (1..=2 * ell + 1).map(|k| (k as f64).ln()).sum();
    let ln_prod: f64 = (1..=ell / 2).map(|k| (p * p + ((2 * k - 1) * (2 * k - 1)) as f64).ln()).sum();
    let ln_v = (l + 1.0) * std::f64::consts::LN_2 + ln_fact + l * x.ln() - ln_fact2 + ln_prod + ln_f
        - ln_cosh(FRAC_PI_2 * p);
    let v = ln_v.exp();
    Ok(KernelEval {
        value: -v,
        abs_error: v * (rel + 32.0 * f64::EPSILON * (1.0 + ln_v.abs())),
        method: KernelMethod::ClosedForm,
    })
}

/// γ·(2 tanh(πp/2)/p)·∏_{k=1}^{ℓ/2}(p²+(2k−1)²)/(p²+4k²) for even ℓ.
pub fn s_reg_closed(ell: u32, p: f64, gamma: f64) -> Result<KernelEval> {
    check_even(ell)?;
    check_gamma(gamma)?;
    let v = gamma * 2.0 * tanh_over(p) * legendre_ratio_product(ell, p);
    Ok(KernelEval {
        value: v,
        abs_error: 8.0 * f64::EPSILON * v * (1.0 + ell as f64),
        method: KernelMethod::ClosedForm,
    })
}

/// tanh(πp/2)/p with limit π/2 at p = 0.
pub(crate) fn tanh_over(p: f64) -> f64 {
    if p.abs() < 1e-6 {
        let t = FRAC_PI_2 * p;
        FRAC_PI_2 * (1.0 - t * t / 3.0)
    } else {
        (FRAC_PI_2 * p).tanh() / p
    }
}

/// ∏_{k=1}^{ℓ/2}(p²+(2k−1)²)/(p²+4k²).
pub(crate) fn legendre_ratio_product(ell: u32, p: f64) -> f64 {
    let p2 = p * p;
    (1..=ell / 2)
        .map(|k| {
            let a = (2 * k - 1) as f64;
            let b = (2 * k) as f64;
            (p2 + a * a) / (p2 + b * b)
        })
        .product()
}

/// S_off;1(0) = (4(M+1)/π)[1 − √(M(M+2))·asin(1/(M+1))].
pub fn s_off_one_at_zero(m: f64) -> Result<f64> {
    check_mass(m)?;
    let x = 1.0 / (m + 1.0);
    Ok(4.0 * (m + 1.0) / PI * (1.0 - (m * (m + 2.0)).sqrt() * x.asin()))
}

/// S_off;ℓ by the closed form for even ℓ and quadrature for odd ℓ, or when
/// the series cannot converge within its term budget.
pub fn s_off_auto(ell: u32, p: f64, m: f64, quad: &QuadratureSpec) -> Result<KernelEval> {
    if ell % 2 == 0 {
        match s_off_closed(ell, p, m) {
            Err(Error::SeriesNonConvergence { .. }) => s_off(ell, p, m, quad),
            r => r,
        }
    } else {
        s_off(ell, p, m, quad)
    }
}

/// S_reg;ℓ by the closed form for even ℓ and quadrature for odd ℓ.
pub fn s_reg_auto(ell: u32, p: f64, gamma: f64, quad: &QuadratureSpec) -> Result<KernelEval> {
    if ell % 2 == 0 {
        s_reg_closed(ell, p, gamma)
    } else {
        s_reg(ell, p, gamma, quad)
    }
}
