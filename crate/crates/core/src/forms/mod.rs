//! Partial-wave components of the three-body quadratic form, their Mellin
//! diagonalization, and the sandwich bounds against the diagonal part.

mod charge;
mod coupling;
mod mellin;

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use charge::{ChargeFamily, ProfileTerm, RadialCharge};
pub use coupling::{alpha_tilde, running_coupling, ProfileKind, RegularizerProfile};
pub use mellin::{mellin_diagonalize, MellinGrid, MellinSamples, COVERAGE_TOL};

use crate::error::{domain, Error, Result};
use crate::kernels::{check_gamma, s_off_auto, s_reg_auto, DerivedMasses};
use crate::quad::{integrate, QuadratureSpec};
use crate::report::BoundReport;
use crate::specfun::legendre_q;
use crate::thresholds::{check_n, lambda_big, lambda_prime, lambda_prime_crude, PhysicalParams};
use mellin::MellinTransform;

/// Spectral parameter ζ and the quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormQuery {
    pub zeta: f64,
    pub quad: QuadratureSpec,
}

impl FormQuery {
    pub fn new(zeta: f64) -> Result<Self> {
        let q = FormQuery { zeta, quad: form_quad() };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return domain(format!("zeta must be nonnegative, got {}", self.zeta));
        }
        self.quad.validate()
    }
}

/// Quadrature defaults for the nested form integrals.
pub fn form_quad() -> QuadratureSpec {
    QuadratureSpec { rtol: 1e-10, atol: 1e-15, max_subdiv: 4000, k_cutoff: 1e8 }
}

// ∫₀^{k_cutoff} g(k) dk over the charge's support, in u = ln k.
fn radial<F: Fn(f64) -> f64>(psi: &RadialCharge, quad: &QuadratureSpec, g: F) -> Result<f64> {
    let (lo, hi) = psi.log_support();
    let hi = hi.min(quad.k_cutoff.ln());
    if !(hi > lo) {
        return Ok(0.0);
    }
    Ok(integrate(
        |u| {
            let k = u.exp();
            g(k) * k
        },
        lo,
        hi,
        quad,
    )?
    .value)
}

// Run an outer integral whose integrand may fail; the first error wins.
fn outer_integral<F: Fn(f64) -> Result<f64>>(a: f64, b: f64, quad: &QuadratureSpec, f: F) -> Result<f64> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let r = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        quad,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r?.value)
}

fn inner_quad(quad: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec { rtol: quad.rtol * 0.1, ..*quad }
}

/// F^ζ_diag = ∫ k² √((μ/η)k² + ζ) ψ(k)² dk.
pub fn f_diag(psi: &RadialCharge, zeta: f64, m: f64, quad: &QuadratureSpec) -> Result<f64> {
    psi.validate()?;
    let r = DerivedMasses::new(m)?;
    let ratio = r.mu / r.eta;
    if !(zeta >= 0.0) {
        return domain(format!("zeta must be nonnegative, got {zeta}"));
    }
    if psi.is_zero() {
        return Ok(0.0);
    }
    radial(psi, quad, |k| {
        let v = psi.eval(k);
        k * k * (ratio * k * k + zeta).sqrt() * v * v
    })
}

// J(t) = ∫ p³ ψ(p) ψ(pt) dp
fn overlap(psi: &RadialCharge, t: f64, quad: &QuadratureSpec) -> Result<f64> {
    radial(psi, quad, |p| p * p * p * psi.eval(p) * psi.eval(p * t))
}

/// F^ζ_off for one partial wave.
///
/// The angular integral is done exactly through Legendre Q_ℓ; the radial part
/// is reduced to q = pt with t ∈ (0, 1) by symmetry.
pub fn f_off(ell: u32, psi: &RadialCharge, zeta: f64, m: f64, n: u32, quad: &QuadratureSpec) -> Result<f64> {
    psi.validate()?;
    check_n(n)?;
    DerivedMasses::new(m)?;
    if !(zeta >= 0.0) {
        return domain(format!("zeta must be nonnegative, got {zeta}"));
    }
    if psi.is_zero() {
        return Ok(0.0);
    }
    let sign = if ell % 2 == 0 { -1.0 } else { 1.0 };
    let pref = sign * 2.0 * (n - 1) as f64 * (m + 1.0) / PI;
    let inner = inner_quad(quad);
    let v = if zeta == 0.0 {
        outer_integral(0.0, 1.0, quad, |t| {
            // (M+1)(1+t²)/(2t) − 1 written without cancellation
            let zm1 = ((1.0 - t) * (1.0 - t) + m * (1.0 + t * t)) / (2.0 * t);
            Ok(t * legendre_q(ell, zm1)? * overlap(psi, t, &inner)?)
        })?
    } else {
        outer_integral(0.0, 1.0, quad, |t| {
            let failure: RefCell<Option<Error>> = RefCell::new(None);
            let j = radial(psi, &inner, |p| {
                let p2 = p * p;
                let zm1 = (p2 * ((1.0 - t) * (1.0 - t) + m * (1.0 + t * t)) + (m + 1.0) * zeta) / (2.0 * p2 * t);
                match legendre_q(ell, zm1) {
                    Ok(q) => p2 * p * psi.eval(p) * psi.eval(p * t) * q,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            })?;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            Ok(t * j)
        })?
    };
    Ok(pref * v)
}

/// F_reg for one partial wave (ζ-independent).
pub fn f_reg(ell: u32, psi: &RadialCharge, n: u32, gamma: f64, quad: &QuadratureSpec) -> Result<f64> {
    psi.validate()?;
    check_n(n)?;
    check_gamma(gamma)?;
    if psi.is_zero() {
        return Ok(0.0);
    }
    let inner = inner_quad(quad);
    let v = outer_integral(0.0, 1.0, quad, |t| {
        let zm1 = (1.0 - t) * (1.0 - t) / (2.0 * t);
        if zm1 <= 0.0 {
            return Ok(0.0);
        }
        Ok(t * legendre_q(ell, zm1)? * overlap(psi, t, &inner)?)
    })?;
    Ok(2.0 * (n - 1) as f64 * gamma / PI * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Off,
    Reg,
}

/// ((N−1)/2) ∫ |g_ψ(p)|² S(p) dp over the real line.
pub fn f_component_diagonalized(
    ell: u32,
    psi: &RadialCharge,
    which: Component,
    n: u32,
    m: f64,
    gamma: f64,
) -> Result<f64> {
    f_component_diagonalized_on(ell, psi, which, n, m, gamma, &MellinGrid::auto(psi))
}

pub fn f_component_diagonalized_on(
    ell: u32,
    psi: &RadialCharge,
    which: Component,
    n: u32,
    m: f64,
    gamma: f64,
    grid: &MellinGrid,
) -> Result<f64> {
    psi.validate()?;
    check_n(n)?;
    check_gamma(gamma)?;
    DerivedMasses::new(m)?;
    if psi.is_zero() {
        return Ok(0.0);
    }
    let tr = MellinTransform::new(psi, grid)?;
    let total = tr.weight_norm_sq();
    if tr.abs_sq(grid.p_max) > 1e-15 * total {
        return Err(Error::GridCoverage(format!("|g(p)|^2 not negligible at p_max = {}", grid.p_max)));
    }
    let kq = QuadratureSpec::default();
    let quad = QuadratureSpec { rtol: 1e-10, atol: 1e-16 * total.max(1e-300), ..form_quad() };
    let v = outer_integral(0.0, grid.p_max, &quad, |p| {
        let s = match which {
            Component::Off => s_off_auto(ell, p, m, &kq)?.value,
            Component::Reg => s_reg_auto(ell, p, gamma, &kq)?.value,
        };
        Ok(tr.abs_sq(p) * s)
    })?;
    // even integrand: the factor 2 folds the negative half-line
    Ok((n - 1) as f64 * v)
}

/// Components of Θ^ζ summed over partial waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub diag: f64,
    pub off: f64,
    pub reg: f64,
    pub total: f64,
}

/// Merge charges that share (ℓ, m); distinct waves are orthogonal.
pub fn group_waves(charge_list: &[RadialCharge]) -> Vec<RadialCharge> {
    let mut map: BTreeMap<(u32, i32), RadialCharge> = BTreeMap::new();
    for c in charge_list {
        map.entry((c.ell, c.m)).and_modify(|e| e.absorb(c)).or_insert_with(|| c.clone());
    }
    map.into_values().collect()
}

/// Θ^ζ = Σ_{ℓ,m} (F^ζ_diag + F^ζ_off + F_reg).
pub fn theta_eval(charge_list: &[RadialCharge], query: &FormQuery, params: &PhysicalParams) -> Result<ThetaValue> {
    query.validate()?;
    params.validate()?;
    let mut out = ThetaValue { diag: 0.0, off: 0.0, reg: 0.0, total: 0.0 };
    for w in group_waves(charge_list) {
        w.validate()?;
        out.diag += f_diag(&w, query.zeta, params.m, &query.quad)?;
        out.off += f_off(w.ell, &w, query.zeta, params.m, params.n, &query.quad)?;
        out.reg += f_reg(w.ell, &w, params.n, params.gamma, &query.quad)?;
    }
    out.total = out.diag + out.off + out.reg;
    Ok(out)
}

/// Relative slack allowed in the sandwich checks.
pub const SANDWICH_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub theta: ThetaValue,
    /// Λ_γ·Θ_diag ≤ Θ.
    pub lower: BoundReport,
    /// Θ ≤ Λ′_γ·Θ_diag.
    pub upper: BoundReport,
    /// Θ ≤ (crude constant)·Θ_diag.
    pub upper_crude: BoundReport,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.lower.passed && self.upper.passed && self.upper_crude.passed
    }

    pub fn reports(&self) -> [&BoundReport; 3] {
        [&self.lower, &self.upper, &self.upper_crude]
    }
}

/// Check Λ_γ·Θ_diag ≤ Θ ≤ Λ′_γ·Θ_diag on a charge.
pub fn check_bounds(charge_list: &[RadialCharge], query: &FormQuery, params: &PhysicalParams) -> Result<SandwichReport> {
    let lam = lambda_big(params.n, params.m, params.gamma)?;
    let lam_p = lambda_prime(params.n, params.m, params.gamma)?;
    let crude = lambda_prime_crude(params.n, params.m, params.gamma)?;
    let th = theta_eval(charge_list, query, params)?;
    let tol = SANDWICH_RTOL * th.diag;
    let ctx = format!(
        "N={} M={} gamma={} zeta={} waves={}",
        params.n,
        params.m,
        params.gamma,
        query.zeta,
        group_waves(charge_list).len()
    );
    Ok(SandwichReport {
        theta: th,
        lower: BoundReport::upper("sandwich_lower", lam * th.diag, th.total, tol).context(ctx.clone()),
        upper: BoundReport::upper("sandwich_upper", th.total, lam_p * th.diag, tol).context(ctx.clone()),
        upper_crude: BoundReport::upper("sandwich_upper_crude", th.total, crude * th.diag, tol).context(ctx),
    })
}

/// Seeded random trial charges: each is 1–3 partial waves with ℓ ≤ `ell_max`,
/// each wave a mixture of 1–3 terms from the three families.
pub fn random_charges(seed: u64, count: usize, ell_max: u32) -> Vec<Vec<RadialCharge>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let waves = rng.gen_range(1..=3);
            (0..waves)
                .map(|_| {
                    let ell = rng.gen_range(0..=ell_max);
                    let m = rng.gen_range(-(ell as i32)..=ell as i32);
                    let n_terms = rng.gen_range(1..=3);
                    let terms = (0..n_terms)
                        .map(|_| {
                            let c = rng.gen_range(-1.0..1.0);
                            match rng.gen_range(0..3) {
                                0 => ProfileTerm::Gaussian { c, beta: rng.gen_range(0.3..3.0) },
                                1 => ProfileTerm::PolyGaussian {
                                    c,
                                    n: rng.gen_range(1..=4),
                                    beta: rng.gen_range(0.3..3.0),
                                },
                                _ => ProfileTerm::LogGaussian {
                                    c,
                                    center: rng.gen_range(-1.0..1.0),
                                    width: rng.gen_range(0.4..1.5),
                                },
                            }
                        })
                        .collect();
                    RadialCharge { terms, ell, m }
                })
                .collect()
        })
        .collect()
}

/// Sandwich checks on `count` random charges, in charge order.
pub fn sandwich_suite(
    seed: u64,
    count: usize,
    ell_max: u32,
    query: &FormQuery,
    params: &PhysicalParams,
) -> Result<Vec<SandwichReport>> {
    random_charges(seed, count, ell_max)
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut r = check_bounds(c, query, params)?;
            for rep in [&mut r.lower, &mut r.upper, &mut r.upper_crude] {
                rep.context = format!("seed={seed} charge={i} {}", rep.context);
            }
            Ok(r)
        })
        .collect()
}

/// Hardy–Rellich spot check for u(x) = e^{−|x|²/(2s²)} in ℝ³:
/// ∫|u|²/|x| ≤ (π/2)∫|k||û|², with the left side computed both in position
/// space and through F_reg;0 in momentum space.
pub fn hardy_rellich_check(s: f64, quad: &QuadratureSpec) -> Result<[BoundReport; 2]> {
    if !(s > 0.0) {
        return domain("width must be positive");
    }
    let lhs_x = 4.0 * PI * integrate(|r| r * (-r * r / (s * s)).exp(), 0.0, 12.0 * s, quad)?.value;
    // unitary transform: û(k) = s³ e^{−s²k²/2}
    let uhat = RadialCharge {
        terms: vec![ProfileTerm::Gaussian { c: s.powi(3), beta: 0.5 * s * s }],
        ell: 0,
        m: 0,
    };
    let lhs_k = 4.0 * PI * f_reg(0, &uhat, 2, 1.0, quad)?;
    let rhs = 0.5 * PI * 4.0 * PI * radial(&uhat, quad, |k| k.powi(3) * uhat.eval(k).powi(2))?;
    let ctx = format!("gaussian width s={s}");
    Ok([
        BoundReport::equal("hardy_rellich_identity", lhs_k, lhs_x, 1e-8 * lhs_x).context(ctx.clone()),
        BoundReport::upper("hardy_rellich_inequality", lhs_x, rhs, 1e-10 * rhs).context(ctx),
    ])
}
