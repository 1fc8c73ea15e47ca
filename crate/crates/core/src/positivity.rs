//! The functions f^N_{ℓ,s}(p) and their monotone minorants h^N_{ℓ,s}(p),
//! with grid checks of the minorant conditions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernels::{
    check_gamma, check_mass, legendre_ratio_product, s_off_auto, s_reg_auto, tanh_over, DerivedMasses,
};
use crate::quad::QuadratureSpec;
use crate::report::BoundReport;
use crate::thresholds::{check_n, gamma_ell_one, s_star_interval, PhysicalParams};

/// Tolerance for the minorant and positivity checks.
pub const SCAN_TOL: f64 = 1e-12;
/// Tolerance for h(0) = f(0).
pub const ANCHOR_TOL: f64 = 1e-10;
/// Far point used for the tail condition.
pub const TAIL_POINT: f64 = 1e6;

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return domain(format!("s must lie in [0,1], got {s}"));
    }
    Ok(())
}

/// f = s√(μ/η) + ((N−1)/2)(S_off;ℓ + S_reg;ℓ)(p).
pub fn f_func(ell: u32, s: f64, p: f64, n: u32, m: f64, gamma: f64) -> Result<f64> {
    check_s(s)?;
    check_n(n)?;
    let dm = DerivedMasses::new(m)?;
    let quad = QuadratureSpec::default();
    let off = s_off_auto(ell, p, m, &quad)?.value;
    let reg = s_reg_auto(ell, p, gamma, &quad)?.value;
    Ok(s * dm.sqrt_mu_over_eta() + 0.5 * (n - 1) as f64 * (off + reg))
}

/// h = s√(μ/η) + (N−1)(γ−γ^ℓ_{M,1})(tanh(πp/2)/p)∏(p²+(2k−1)²)/(p²+4k²).
pub fn h_func(ell: u32, s: f64, p: f64, n: u32, m: f64, gamma: f64) -> Result<f64> {
    let g1 = gamma_ell_one(ell, m)?;
    h_with(ell, s, p, n, m, gamma, g1)
}

fn h_with(ell: u32, s: f64, p: f64, n: u32, m: f64, gamma: f64, g1: f64) -> Result<f64> {
    check_s(s)?;
    check_n(n)?;
    check_gamma(gamma)?;
    let dm = DerivedMasses::new(m)?;
    Ok(s * dm.sqrt_mu_over_eta() + (n - 1) as f64 * (gamma - g1) * tanh_over(p) * legendre_ratio_product(ell, p))
}

/// The four minorant conditions (a)–(d) on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HConditions {
    /// h ≤ f pointwise.
    pub a: BoundReport,
    /// h(0) = f(0).
    pub b: BoundReport,
    /// f and h share the limit s√(μ/η) at the 1/p rate.
    pub c: BoundReport,
    /// h is monotone.
    pub d: BoundReport,
}

impl HConditions {
    pub fn all(&self) -> [&BoundReport; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn passed(&self) -> bool {
        self.all().iter().all(|r| r.passed)
    }

    /// One report naming every failed condition.
    pub fn summary(&self) -> BoundReport {
        let worst = self
            .all()
            .into_iter()
            .min_by(|x, y| (x.margin + x.tolerance).total_cmp(&(y.margin + y.tolerance)))
            .expect("four reports");
        let failed: Vec<&str> = self.all().iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
        let mut r = worst.clone();
        r.name = "h_conditions".into();
        r.context = if failed.is_empty() {
            format!("all of a-d hold; tightest {}", worst.name)
        } else {
            format!("failed: {}; {}", failed.join(","), worst.context)
        };
        r
    }
}

struct Samples {
    p: Vec<f64>,
    f: Vec<f64>,
    h: Vec<f64>,
    f0: f64,
    h0: f64,
}

fn sample(ell: u32, s: f64, n: u32, m: f64, gamma: f64, g1: f64, grid: &[f64]) -> Result<Samples> {
    let mut f = Vec::with_capacity(grid.len());
    let mut h = Vec::with_capacity(grid.len());
    for &p in grid {
        f.push(f_func(ell, s, p, n, m, gamma)?);
        h.push(h_with(ell, s, p, n, m, gamma, g1)?);
    }
    Ok(Samples {
        p: grid.to_vec(),
        f,
        h,
        f0: f_func(ell, s, 0.0, n, m, gamma)?,
        h0: h_with(ell, s, 0.0, n, m, gamma, g1)?,
    })
}

fn conditions(ell: u32, s: f64, n: u32, m: f64, gamma: f64, g1: f64, sm: &Samples) -> Result<HConditions> {
    let ctx = format!("ell={ell} s={s} N={n} M={m} gamma={gamma}");

    let (mut worst_a, mut at_a) = (f64::INFINITY, 0.0);
    for ((&p, &f), &h) in sm.p.iter().zip(&sm.f).zip(&sm.h) {
        if f - h < worst_a {
            worst_a = f - h;
            at_a = p;
        }
    }
    let a = BoundReport::with_margin("a_minorant", worst_a, 0.0, worst_a, SCAN_TOL)
        .context(format!("{ctx}; min f-h at p={at_a}"));

    let b = BoundReport::equal("b_anchor", sm.h0, sm.f0, ANCHOR_TOL).context(ctx.clone());

    let limit = s * DerivedMasses::new(m)?.sqrt_mu_over_eta();
    let envelope = (n - 1) as f64 * (gamma + g1);
    let mut worst_c = f64::INFINITY;
    let mut at_c = 0.0;
    let p_last = sm.p.last().copied().unwrap_or(0.0);
    for &pt in &[p_last, TAIL_POINT] {
        if pt <= 0.0 {
            continue;
        }
        let dev = (f_func(ell, s, pt, n, m, gamma)? - limit)
            .abs()
            .max((h_with(ell, s, pt, n, m, gamma, g1)? - limit).abs());
        let margin = envelope / pt - dev;
        if margin < worst_c {
            worst_c = margin;
            at_c = pt;
        }
    }
    let c = BoundReport::with_margin("c_tail", limit, envelope, worst_c, SCAN_TOL)
        .context(format!("{ctx}; tightest at p={at_c}"));

    let mut up: f64 = 0.0;
    let mut down: f64 = 0.0;
    let mut prev = sm.h0;
    for &h in &sm.h {
        let d = h - prev;
        up = up.max(d);
        down = down.max(-d);
        prev = h;
    }
    let flip = up.min(down);
    let d = BoundReport::with_margin("d_monotone", up, down, -flip, SCAN_TOL).context(ctx);
    Ok(HConditions { a, b, c, d })
}

/// Check conditions (a)–(d) for one even ℓ on `p_grid` (p = 0 is added by limit).
pub fn verify_h_conditions(
    ell: u32,
    s: f64,
    n: u32,
    m: f64,
    gamma: f64,
    p_grid: &[f64],
) -> Result<HConditions> {
    if ell % 2 != 0 {
        return domain(format!("minorant only defined for even ell, got {ell}"));
    }
    if p_grid.is_empty() || p_grid.windows(2).any(|w| !(w[0] < w[1])) || p_grid[0] < 0.0 {
        return domain("p_grid must be nonempty, nonnegative and strictly ascending");
    }
    check_mass(m)?;
    let g1 = gamma_ell_one(ell, m)?;
    let sm = sample(ell, s, n, m, gamma, g1, p_grid)?;
    conditions(ell, s, n, m, gamma, g1, &sm)
}

/// Log-spaced grid on [p_min, p_max].
pub fn log_grid(p_min: f64, p_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(p_min > 0.0 && p_max > p_min && n_points >= 2) {
        return domain(format!("bad log grid [{p_min}, {p_max}] x {n_points}"));
    }
    let (a, b) = (p_min.ln(), p_max.ln());
    Ok((0..n_points)
        .map(|i| {
            if i + 1 == n_points {
                p_max
            } else {
                (a + (b - a) * i as f64 / (n_points - 1) as f64).exp()
            }
        })
        .collect())
}

/// How the splitting parameter s*_ℓ is picked inside its admissible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SStarChoice {
    /// The lower endpoint, which optimizes Λ_γ but makes f₀(0) vanish.
    LowerEndpoint,
    /// Midpoint of the admissible interval.
    Midpoint,
    Fixed(f64),
}

impl SStarChoice {
    pub fn resolve(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            SStarChoice::LowerEndpoint => lo,
            SStarChoice::Midpoint => 0.5 * (lo + hi),
            SStarChoice::Fixed(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllScan {
    pub ell: u32,
    pub gamma_ell_one: f64,
    pub min_f: f64,
    pub min_h: f64,
    pub min_f_minus_h: f64,
    pub anchor_gap: f64,
    pub monotone: bool,
    pub conditions: HConditions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityScan {
    pub params: PhysicalParams,
    pub ell_max: u32,
    pub s_star: f64,
    pub p_grid: Vec<f64>,
    pub min_f: f64,
    pub min_h: f64,
    pub min_f_minus_h: f64,
    pub max_anchor_gap: f64,
    pub monotone: bool,
    pub tol: f64,
    pub passed: bool,
    pub per_ell: Vec<EllScan>,
}

impl PositivityScan {
    /// Every check of the scan: the minorant conditions plus strict f > 0.
    pub fn strictly_positive(&self) -> bool {
        self.passed && self.min_f > 0.0 && self.monotone && self.max_anchor_gap <= ANCHOR_TOL
    }
}

/// Scan every even ℓ ≤ `ell_max` on p = 0 plus a log grid [1e−3, p_max].
pub fn scan_positivity(params: &PhysicalParams, ell_max: u32, p_max: f64, n_points: usize) -> Result<PositivityScan> {
    scan_positivity_with(params, ell_max, p_max, n_points, SStarChoice::Midpoint)
}

pub fn scan_positivity_with(
    params: &PhysicalParams,
    ell_max: u32,
    p_max: f64,
    n_points: usize,
    choice: SStarChoice,
) -> Result<PositivityScan> {
    params.validate()?;
    let (n, m, gamma) = (params.n, params.m, params.gamma);
    let (lo, hi) = s_star_interval(0, n, m, gamma)?;
    let s = choice.resolve(lo, hi);
    check_s(s)?;
    let grid = log_grid(1e-3, p_max, n_points)?;
    let ells: Vec<u32> = (0..=ell_max).step_by(2).collect();
    let per_ell = ells
        .par_iter()
        .map(|&ell| {
            let g1 = gamma_ell_one(ell, m)?;
            let sm = sample(ell, s, n, m, gamma, g1, &grid)?;
            let cond = conditions(ell, s, n, m, gamma, g1, &sm)?;
            let min_f = sm.f.iter().copied().fold(sm.f0, f64::min);
            let min_h = sm.h.iter().copied().fold(sm.h0, f64::min);
            let min_fh = sm.f.iter().zip(&sm.h).map(|(f, h)| f - h).fold(sm.f0 - sm.h0, f64::min);
            Ok(EllScan {
                ell,
                gamma_ell_one: g1,
                min_f,
                min_h,
                min_f_minus_h: min_fh,
                anchor_gap: (sm.f0 - sm.h0).abs(),
                monotone: cond.d.passed,
                conditions: cond,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fold = |g: fn(&EllScan) -> f64| per_ell.iter().map(g).fold(f64::INFINITY, f64::min);
    let min_f = fold(|e| e.min_f);
    let min_h = fold(|e| e.min_h);
    let min_f_minus_h = fold(|e| e.min_f_minus_h);
    let max_anchor_gap = per_ell.iter().map(|e| e.anchor_gap).fold(0.0, f64::max);
    let monotone = per_ell.iter().all(|e| e.monotone);
    Ok(PositivityScan {
        params: *params,
        ell_max,
        s_star: s,
        p_grid: grid,
        min_f,
        min_h,
        min_f_minus_h,
        max_anchor_gap,
        monotone,
        tol: SCAN_TOL,
        passed: min_h >= -SCAN_TOL && min_f_minus_h >= -SCAN_TOL,
        per_ell,
    })
}
