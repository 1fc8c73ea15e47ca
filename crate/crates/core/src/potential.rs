//! The singular potential of a separable Gaussian charge for N = 2, its
//! expansion near the coincidence plane, and the Yukawa transform behind it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::DerivedMasses;
use crate::quad::{integrate, QuadratureSpec};
use crate::report::BoundReport;

/// ∫ e^{ik·x}/(k²+a²) d³k = (4π/|x|) ∫₀^∞ k sin(k|x|)/(k²+a²) dk, summed
/// between the zeros of sin(k|x|) and accelerated with Wynn's ε-algorithm.
pub fn yukawa_transform(a: f64, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0 && a >= 0.0 && a.is_finite() && x.is_finite()) {
        return domain(format!("yukawa transform needs a >= 0 and |x| > 0, got a={a} x={x}"));
    }
    let f = |k: f64| {
        if a == 0.0 {
            // k sin(kx)/k² = sin(kx)/k
            if k == 0.0 {
                x
            } else {
                (k * x).sin() / k
            }
        } else {
            k * (k * x).sin() / (k * k + a * a)
        }
    };
    let half = PI / x;
    let mut partial = Vec::new();
    let mut sum = 0.0;
    let mut last = f64::NAN;
    for j in 0..120 {
        sum += integrate(f, j as f64 * half, (j + 1) as f64 * half, quad)?.value;
        partial.push(sum);
        if partial.len() >= 12 && partial.len() % 2 == 0 {
            let est = wynn_epsilon(&partial);
            if (est - last).abs() <= 1e-13 * est.abs() {
                return Ok(4.0 * PI / x * est);
            }
            last = est;
        }
    }
    Err(Error::SeriesNonConvergence { terms: partial.len(), partial: 4.0 * PI / x * last })
}

/// Wynn's ε-algorithm on a sequence of partial sums.
fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    for k in 1..n {
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|i| {
                let d = cur[i + 1] - cur[i];
                if d == 0.0 {
                    f64::INFINITY
                } else {
                    prev[i + 1] + 1.0 / d
                }
            })
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            best = *cur.last().expect("nonempty");
        }
        if cur.len() < 2 {
            break;
        }
    }
    best
}

/// Compare the radial quadrature with (2π²/|x|) e^{−a|x|}.
pub fn yukawa_transform_check(a: f64, x: f64, quad: &QuadratureSpec) -> Result<BoundReport> {
    let numeric = yukawa_transform(a, x, quad)?;
    let closed = 2.0 * PI * PI / x * (-a * x).exp();
    Ok(BoundReport::equal("yukawa_transform", numeric, closed, 1e-6 * closed).context(format!("a={a} |x|={x}")))
}

/// ξ(y, x₂) = A·exp(−|y|²/(2w₀²))·exp(−|x₂|²/(2w₁²)) on the plane x₁ = x₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableCharge {
    /// [contact-coordinate width, spectator width]
    pub widths: Vec<f64>,
    pub amplitude: f64,
}

impl SeparableCharge {
    pub fn new(widths: Vec<f64>, amplitude: f64) -> Result<Self> {
        let c = SeparableCharge { widths, amplitude };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() != 2 {
            return domain(format!(
                "a two-boson charge has exactly two coordinate blocks, got {}",
                self.widths.len()
            ));
        }
        if self.widths.iter().any(|w| !(*w > 0.0 && w.is_finite())) || !self.amplitude.is_finite() {
            return domain(format!("invalid separable charge {self:?}"));
        }
        Ok(())
    }

    /// ξ at contact coordinate distance |y| and spectator distance |x|.
    pub fn eval(&self, y: f64, x: f64) -> f64 {
        let (w0, w1) = (self.widths[0], self.widths[1]);
        self.amplitude * (-y * y / (2.0 * w0 * w0)).exp() * (-x * x / (2.0 * w1 * w1)).exp()
    }
}

/// Position of the contact point and spectator, and the approach direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayGeometry {
    /// (x₁ + M x₀)/(M+1), held fixed along the ray.
    pub contact: [f64; 3],
    /// The other boson x₂.
    pub spectator: [f64; 3],
    /// Unit vector along x₀ − x₁.
    pub direction: [f64; 3],
}

impl Default for RayGeometry {
    /// Spectator ten units from the contact point, ray transverse to it.
    fn default() -> Self {
        RayGeometry { contact: [0.0; 3], spectator: [0.0, 0.0, 10.0], direction: [1.0, 0.0, 0.0] }
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn axpy(a: [f64; 3], s: f64, d: [f64; 3]) -> [f64; 3] {
    [a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]]
}

impl RayGeometry {
    /// (x₀, x₁, x₂) at distance r = |x₀ − x₁|.
    pub fn positions(&self, r: f64, m: f64) -> [[f64; 3]; 3] {
        let e = self.direction;
        let x0 = axpy(self.contact, r / (m + 1.0), e);
        let x1 = axpy(self.contact, -m * r / (m + 1.0), e);
        [x0, x1, self.spectator]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub r: f64,
    pub value: f64,
    pub lambda: f64,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn potential_quad() -> QuadratureSpec {
    QuadratureSpec { rtol: 1e-11, atol: 1e-300, max_subdiv: 2000, k_cutoff: 40.0 }
}

// (2/π) A w₀³ w₁³ ∫∫ p² k² sinc(p|Y|) sinc(k|X|) e^{−w₀²p²/2 − w₁²k²/2} weight(√(p²/(M+1)+k²+λ)) dp dk
fn block_integral(
    charge: &SeparableCharge,
    y: f64,
    x: f64,
    m: f64,
    lambda: f64,
    weight: impl Fn(f64) -> f64 + Sync,
) -> Result<f64> {
    let (w0, w1) = (charge.widths[0], charge.widths[1]);
    let quad = potential_quad();
    let p_max = 80f64.sqrt() / w0;
    let k_max = 80f64.sqrt() / w1;
    let inner = QuadratureSpec { rtol: 1e-12, ..quad };
    let failure = std::cell::RefCell::new(None);
    let outer = integrate(
        |p| {
            let gp = p * p * sinc(p * y) * (-0.5 * w0 * w0 * p * p).exp();
            let base = p * p / (m + 1.0) + lambda;
            match integrate(
                |k| k * k * sinc(k * x) * (-0.5 * w1 * w1 * k * k).exp() * weight((base + k * k).sqrt()),
                0.0,
                k_max,
                &inner,
            ) {
                Ok(v) => gp * v.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        p_max,
        &quad,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(2.0 / PI * charge.amplitude * (w0 * w1).powi(3) * outer?.value)
}

/// G^λ_j ξ at distance r from the plane, for contact distance |Y| and
/// spectator distance |X| (both measured from the origin of the charge).
pub fn potential_term(charge: &SeparableCharge, y: f64, x: f64, r: f64, lambda: f64, m: f64) -> Result<f64> {
    charge.validate()?;
    let mu = DerivedMasses::new(m)?.mu;
    check_lambda(lambda)?;
    if !(r > 0.0) {
        return domain(format!("the potential is evaluated off the plane only, got r = {r}"));
    }
    let s = mu.sqrt() * r;
    Ok(block_integral(charge, y, x, m, lambda, |q| (-s * q).exp())? / r)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return domain(format!("lambda must be positive, got {lambda}"));
    }
    Ok(())
}

/// G^λ_1 ξ along the ray of `geometry`.
pub fn potential_on_ray_at(
    charge: &SeparableCharge,
    geometry: &RayGeometry,
    lambda: f64,
    m: f64,
    r_list: &[f64],
) -> Result<Vec<PotentialSample>> {
    charge.validate()?;
    let y = norm(geometry.contact);
    let x = norm(geometry.spectator);
    r_list
        .par_iter()
        .map(|&r| Ok(PotentialSample { r, value: potential_term(charge, y, x, r, lambda, m)?, lambda }))
        .collect()
}

/// G^λ_1 ξ along the default far-spectator ray.
pub fn potential_on_ray(charge: &SeparableCharge, lambda: f64, m: f64, r_list: &[f64]) -> Result<Vec<PotentialSample>> {
    potential_on_ray_at(charge, &RayGeometry::default(), lambda, m, r_list)
}

/// G^λ_1 ξ + G^λ_2 ξ along the ray, i.e. the full N = 2 potential.
pub fn full_potential_on_ray(
    charge: &SeparableCharge,
    geometry: &RayGeometry,
    lambda: f64,
    m: f64,
    r_list: &[f64],
) -> Result<Vec<PotentialSample>> {
    charge.validate()?;
    r_list
        .par_iter()
        .map(|&r| {
            let [x0, x1, x2] = geometry.positions(r, m);
            let g1 = potential_term(charge, norm(geometry.contact), norm(x2), r, lambda, m)?;
            // second plane: contact coordinate (x₂ + M x₀)/(M+1), spectator x₁
            let y2 = [
                (x2[0] + m * x0[0]) / (m + 1.0),
                (x2[1] + m * x0[1]) / (m + 1.0),
                (x2[2] + m * x0[2]) / (m + 1.0),
            ];
            let r2 = norm(sub(x0, x2));
            let g2 = potential_term(charge, norm(y2), norm(x1), r2, lambda, m)?;
            Ok(PotentialSample { r, value: g1 + g2, lambda })
        })
        .collect()
}

/// Point on the plane at which Γ_diag is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactPoint {
    pub contact: [f64; 3],
    pub spectator: [f64; 3],
}

impl From<&RayGeometry> for ContactPoint {
    fn from(g: &RayGeometry) -> Self {
        ContactPoint { contact: g.contact, spectator: g.spectator }
    }
}

/// (Γ^{j,λ}_diag ξ) at a contact configuration.
pub fn gamma_diag_apply(charge: &SeparableCharge, lambda: f64, m: f64, contact_point: &ContactPoint) -> Result<f64> {
    charge.validate()?;
    check_lambda(lambda)?;
    let mu = DerivedMasses::new(m)?.mu;
    let y = norm(contact_point.contact);
    let x = norm(contact_point.spectator);
    Ok(mu.sqrt() * block_integral(charge, y, x, m, lambda, |q| q)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub singular_coeff: f64,
    pub const_term: f64,
    pub report: BoundReport,
}

/// Radii below which samples enter the fit.
pub const FIT_RADIUS: f64 = 0.1;

/// Least-squares fit of value ≈ c₋₁/r + c₀ (as r·value = c₋₁ + c₀ r) on the
/// samples with r < 0.1.
pub fn asymptotic_fit(samples: &[PotentialSample], contact_value: f64) -> Result<AsymptoticFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.r > 0.0 && s.r < FIT_RADIUS)
        .map(|s| (s.r, s.r * s.value))
        .collect();
    if pts.len() < 4 {
        return Err(Error::IllConditioned(format!("need at least 4 samples with r < {FIT_RADIUS}, got {}", pts.len())));
    }
    let (rmin, rmax) = pts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &(r, _)| (a.min(r), b.max(r)));
    if rmax < 10.0 * rmin * (1.0 - 1e-9) {
        return Err(Error::IllConditioned(format!("samples span [{rmin}, {rmax}], less than a decade")));
    }
    let n = pts.len() as f64;
    let mean_r = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_r).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_r) * (p.1 - mean_y)).sum();
    if !(sxx > 0.0) {
        return Err(Error::IllConditioned("all radii coincide".into()));
    }
    let c0 = sxy / sxx;
    let cm1 = mean_y - c0 * mean_r;
    let tol = 0.01 * contact_value.abs();
    let report = BoundReport::equal("singular_coefficient", cm1, contact_value, tol)
        .context(format!("{} samples, r in [{rmin:.3e}, {rmax:.3e}]", pts.len()));
    Ok(AsymptoticFit { singular_coeff: cm1, const_term: c0, report })
}

/// Log-spaced radii in [a, b].
pub fn log_radii(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}
