use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::charge::RadialCharge;
use crate::error::{Error, Result};

/// Uniform t-grid for g_ψ(p) = (2π)^{−1/2} ∫ e^{−ipt} e^{2t} ψ(e^t) dt and the
/// p-samples to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub p_max: f64,
    pub n_p: usize,
}

/// Endpoint threshold relative to the peak of e^{2t}ψ(e^t).
pub const COVERAGE_TOL: f64 = 1e-16;

impl MellinGrid {
    /// Grid covering the support of `psi` with spacing 0.02.
    pub fn auto(psi: &RadialCharge) -> Self {
        let (lo, hi) = psi.log_support();
        // e^{2t}ψ decays like the square root of the radial weight
        let (t_min, t_max) = (lo.min(-1.0) * 0.5 - 2.0, hi + 1.0);
        let (t_min, t_max) = widen(psi, t_min, t_max);
        let n_t = ((t_max - t_min) / 0.02).ceil() as usize + 1;
        MellinGrid { t_min, t_max, n_t, p_max: 60.0, n_p: 241 }
    }

    pub fn step(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_t - 1) as f64
    }
}

fn widen(psi: &RadialCharge, mut a: f64, mut b: f64) -> (f64, f64) {
    let peak = peak_weight(psi, a, b);
    if peak == 0.0 {
        return (a, b);
    }
    for _ in 0..200 {
        let ok_a = psi.mellin_weight(a).abs() < COVERAGE_TOL * peak;
        let ok_b = psi.mellin_weight(b).abs() < COVERAGE_TOL * peak;
        if ok_a && ok_b {
            break;
        }
        if !ok_a {
            a -= 1.0;
        }
        if !ok_b {
            b += 0.25;
        }
    }
    (a, b)
}

fn peak_weight(psi: &RadialCharge, a: f64, b: f64) -> f64 {
    (0..=2000)
        .map(|i| psi.mellin_weight(a + (b - a) * i as f64 / 2000.0).abs())
        .fold(0.0, f64::max)
}

/// Tabulated g_ψ on the p-grid, with the Plancherel norm ∫|g_ψ|².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MellinSamples {
    pub grid: MellinGrid,
    pub t_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    /// (re, im) of g_ψ(p) for each p in `p_grid`.
    pub values: Vec<(f64, f64)>,
    pub norm_sq: f64,
}

/// Trapezoidal Fourier sum on a fixed t-grid.
pub(crate) struct MellinTransform {
    t0: f64,
    h: f64,
    w: Vec<f64>,
}

impl MellinTransform {
    pub(crate) fn new(psi: &RadialCharge, grid: &MellinGrid) -> Result<Self> {
        if grid.n_t < 3 || !(grid.t_max > grid.t_min) {
            return Err(Error::GridCoverage(format!("degenerate t-grid {grid:?}")));
        }
        let h = grid.step();
        let w: Vec<f64> = (0..grid.n_t).map(|j| psi.mellin_weight(grid.t_min + j as f64 * h)).collect();
        let peak = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ends = w[0].abs().max(w[grid.n_t - 1].abs());
        if peak > 0.0 && ends > COVERAGE_TOL * peak {
            return Err(Error::GridCoverage(format!(
                "e^(2t)psi(e^t) is {:.3e} of its peak at the grid ends [{}, {}]",
                ends / peak,
                grid.t_min,
                grid.t_max
            )));
        }
        Ok(MellinTransform { t0: grid.t_min, h, w })
    }

    pub(crate) fn eval(&self, p: f64) -> (f64, f64) {
        // e^{−ipt_j} by rotation
        let (s0, c0) = (-p * self.t0).sin_cos();
        let (sh, ch) = (-p * self.h).sin_cos();
        let (mut c, mut s) = (c0, s0);
        let (mut re, mut im) = (0.0, 0.0);
        let last = self.w.len() - 1;
        for (j, &wj) in self.w.iter().enumerate() {
            let wt = if j == 0 || j == last { 0.5 * wj } else { wj };
            re += wt * c;
            im += wt * s;
            let nc = c * ch - s * sh;
            s = s * ch + c * sh;
            c = nc;
            if j % 64 == 63 {
                // re-anchor to limit rounding drift
                let (sa, ca) = (-p * (self.t0 + (j + 1) as f64 * self.h)).sin_cos();
                c = ca;
                s = sa;
            }
        }
        let k = self.h / (2.0 * PI).sqrt();
        (re * k, im * k)
    }

    pub(crate) fn abs_sq(&self, p: f64) -> f64 {
        let (re, im) = self.eval(p);
        re * re + im * im
    }

    /// ∫ e^{4t}ψ(e^t)² dt, the t-side of Plancherel.
    pub(crate) fn weight_norm_sq(&self) -> f64 {
        let last = self.w.len() - 1;
        self.w
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 0 || j == last { 0.5 * v * v } else { v * v })
            .sum::<f64>()
            * self.h
    }
}

/// Tabulate g_ψ on `grid`.
pub fn mellin_diagonalize(psi: &RadialCharge, grid: &MellinGrid) -> Result<MellinSamples> {
    psi.validate()?;
    let tr = MellinTransform::new(psi, grid)?;
    let h = grid.step();
    let t_grid: Vec<f64> = (0..grid.n_t).map(|j| grid.t_min + j as f64 * h).collect();
    let n_p = grid.n_p.max(2);
    let p_grid: Vec<f64> = (0..n_p).map(|i| -grid.p_max + 2.0 * grid.p_max * i as f64 / (n_p - 1) as f64).collect();
    let values = p_grid.iter().map(|&p| tr.eval(p)).collect();
    Ok(MellinSamples { grid: *grid, t_grid, p_grid, values, norm_sq: tr.weight_norm_sq() })
}
