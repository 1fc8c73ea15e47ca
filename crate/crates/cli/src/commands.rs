use rayon::prelude::*;
use stm_reg::forms::{hardy_rellich_check, sandwich_suite, FormQuery};
use stm_reg::kernels::{s_off, s_off_closed, s_reg, s_reg_closed};
use stm_reg::positivity::{log_grid, scan_positivity};
use stm_reg::potential::{
    asymptotic_fit, log_radii, potential_on_ray, yukawa_transform_check, RayGeometry, SeparableCharge,
};
use stm_reg::thresholds::{gamma_crit, gamma_ell, PhysicalParams, ThresholdSet};
use stm_reg::{BoundReport, Error, QuadratureSpec};

use crate::config::{usage, Command, RunConfig, UsageError, GAMMA_OFFSET};
use crate::output::{KernelRow, Report, Rows, ThresholdRow};

pub fn run(cfg: RunConfig) -> anyhow::Result<Report> {
    let (rows, checks) = match cfg.command {
        Command::Thresholds => (Rows::Thresholds(thresholds(&cfg)?), vec![]),
        Command::Kernels => {
            let (rows, checks) = kernels(&cfg)?;
            (Rows::Kernels(rows), checks)
        }
        Command::Positivity => (Rows::None, positivity(&cfg)?),
        Command::Bounds => (Rows::None, bounds(&cfg)?),
        Command::Potential => (Rows::None, potential(&cfg)?),
        Command::VerifyAll => {
            let mut all = threshold_checks(&cfg)?;
            all.extend(kernels(&cfg)?.1);
            all.extend(positivity(&cfg)?);
            all.extend(bounds(&cfg)?);
            all.extend(potential(&cfg)?);
            (Rows::None, all)
        }
    };
    Ok(Report::new(cfg, rows, checks))
}

// Parameter problems are usage errors; anything else is a numerical failure.
fn classify(e: Error) -> anyhow::Error {
    match e {
        Error::Domain(_) | Error::Subcritical { .. } => UsageError(e.to_string()).into(),
        other => other.into(),
    }
}

// A check whose evaluation failed is reported as failed, never dropped.
fn failed_check(name: &str, context: String, e: Error) -> BoundReport {
    BoundReport::with_margin(name, f64::NAN, f64::NAN, f64::NEG_INFINITY, 0.0).context(format!("{context}; error: {e}"))
}

fn resolve_gamma(n: u32, m: f64, gamma: Option<f64>) -> anyhow::Result<f64> {
    let gc = gamma_crit(n, m).map_err(classify)?;
    match gamma {
        None => Ok(gc + GAMMA_OFFSET),
        Some(g) if g > gc => Ok(g),
        Some(g) => Ok(usage(format!("gamma = {g} is not above gamma_c = {gc} for N = {n}, M = {m}"))?),
    }
}

fn cell_params(cfg: &RunConfig) -> anyhow::Result<Vec<PhysicalParams>> {
    cfg.cells()
        .into_iter()
        .map(|(n, m, g)| {
            let gamma = resolve_gamma(n, m, g)?;
            PhysicalParams::new(n, m, gamma, cfg.alpha, cfg.b, cfg.lambda).map_err(classify)
        })
        .collect()
}

fn echo(p: &PhysicalParams) -> String {
    format!("N={} M={} gamma={} alpha={} b={} lambda={}", p.n, p.m, p.gamma, p.alpha, p.b, p.lambda)
}

fn thresholds(cfg: &RunConfig) -> anyhow::Result<Vec<ThresholdRow>> {
    let cells = cell_params(cfg)?;
    let sets: Vec<_> = cells.par_iter().map(ThresholdSet::compute).collect();
    cells
        .iter()
        .zip(sets)
        .map(|(p, t)| Ok(ThresholdRow::new(p.n, p.m, p.gamma, &t.map_err(classify)?)))
        .collect()
}

fn threshold_checks(cfg: &RunConfig) -> anyhow::Result<Vec<BoundReport>> {
    let cells = cell_params(cfg)?;
    let mut out = Vec::new();
    for p in &cells {
        let gc = gamma_crit(p.n, p.m).map_err(classify)?;
        let ctx = echo(p);
        let best = (0..=12)
            .step_by(2)
            .map(|l| gamma_ell(l, p.n, p.m))
            .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v)));
        out.push(match best {
            Ok(best) => BoundReport::equal("gamma_c_max_over_waves", best, gc, 1e-8).context(ctx.clone()),
            Err(e) => failed_check("gamma_c_max_over_waves", ctx.clone(), e),
        });
        let floor = (2.0 / std::f64::consts::PI) * (p.n - 2) as f64 / (p.n - 1) as f64;
        out.push(BoundReport::upper("gamma_c_above_large_mass_limit", floor, gc, 0.0).context(ctx.clone()));
        out.push(BoundReport::upper("gamma_c_below_one", gc, 1.0, 0.0).context(ctx));
    }
    Ok(out)
}

fn kernels(cfg: &RunConfig) -> anyhow::Result<(Vec<KernelRow>, Vec<BoundReport>)> {
    let cells = cell_params(cfg)?;
    let mut ps = vec![0.0];
    ps.extend(log_grid(1e-3, cfg.p_max, cfg.grid).map_err(classify)?);
    let quad = QuadratureSpec::default();
    let jobs: Vec<(PhysicalParams, u32)> =
        cells.iter().flat_map(|p| (0..=cfg.ell_max).step_by(2).map(move |l| (*p, l))).collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(prm, ell)| {
            let ctx = format!("ell={ell} {}", echo(&prm));
            let mut rows = Vec::with_capacity(ps.len());
            let (mut off_gap, mut reg_gap) = (0.0f64, 0.0f64);
            for &p in &ps {
                let eval = || -> stm_reg::Result<KernelRow> {
                    Ok(KernelRow {
                        ell,
                        p,
                        m: prm.m,
                        gamma: prm.gamma,
                        s_off_closed: s_off_closed(ell, p, prm.m)?.value,
                        s_off_quadrature: s_off(ell, p, prm.m, &quad)?.value,
                        s_reg_closed: s_reg_closed(ell, p, prm.gamma)?.value,
                        s_reg_quadrature: s_reg(ell, p, prm.gamma, &quad)?.value,
                    })
                };
                match eval() {
                    Ok(r) => {
                        off_gap = off_gap.max((r.s_off_closed - r.s_off_quadrature).abs());
                        reg_gap = reg_gap.max((r.s_reg_closed - r.s_reg_quadrature).abs());
                        rows.push(r);
                    }
                    Err(e) => {
                        let c = format!("{ctx} p={p}");
                        return (rows, vec![failed_check("kernel_route_off", c.clone(), e), failed_check("kernel_route_reg", c, Error::Domain("not evaluated".into()))]);
                    }
                }
            }
            let checks = vec![
                BoundReport::upper("kernel_route_off", off_gap, 0.0, 1e-9).context(ctx.clone()),
                BoundReport::upper("kernel_route_reg", reg_gap, 0.0, 1e-9).context(ctx),
            ];
            (rows, checks)
        })
        .collect();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (r, c) in results {
        rows.extend(r);
        checks.extend(c);
    }
    Ok((rows, checks))
}

fn positivity(cfg: &RunConfig) -> anyhow::Result<Vec<BoundReport>> {
    let cells = cell_params(cfg)?;
    let scans: Vec<_> = cells.par_iter().map(|p| scan_positivity(p, cfg.ell_max, cfg.p_max, cfg.grid)).collect();
    let mut out = Vec::new();
    for (p, scan) in cells.iter().zip(scans) {
        let ctx = echo(p);
        match scan {
            Ok(s) => {
                for e in &s.per_ell {
                    out.extend(e.conditions.all().into_iter().cloned());
                    out.push(
                        BoundReport::with_margin("min_f_positive", 0.0, e.min_f, e.min_f, 0.0)
                            .context(format!("ell={} s={} {ctx}", e.ell, s.s_star)),
                    );
                }
            }
            Err(e @ (Error::Domain(_) | Error::Subcritical { .. })) => return Err(classify(e)),
            Err(e) => out.push(failed_check("positivity_scan", ctx, e)),
        }
    }
    Ok(out)
}

const SANDWICH_CHARGES: usize = 20;
const SANDWICH_ZETA: f64 = 1.0;

fn bounds(cfg: &RunConfig) -> anyhow::Result<Vec<BoundReport>> {
    let cells = cell_params(cfg)?;
    let query = FormQuery::new(SANDWICH_ZETA).map_err(classify)?;
    let mut out = Vec::new();
    for p in &cells {
        match sandwich_suite(cfg.seed, SANDWICH_CHARGES, cfg.ell_max, &query, p) {
            Ok(reports) => {
                for r in reports {
                    out.extend(r.reports().into_iter().cloned());
                }
            }
            Err(e) => out.push(failed_check("sandwich_suite", format!("seed={} {}", cfg.seed, echo(p)), e)),
        }
    }
    let quad = QuadratureSpec::default();
    for s in [0.5, 1.0, 2.0] {
        match hardy_rellich_check(s, &quad) {
            Ok(r) => out.extend(r),
            Err(e) => out.push(failed_check("hardy_rellich", format!("s={s}"), e)),
        }
    }
    Ok(out)
}

const FIT_LAMBDAS: [f64; 3] = [1.0, 5.0, 10.0];

fn potential(cfg: &RunConfig) -> anyhow::Result<Vec<BoundReport>> {
    let charge = SeparableCharge::new(vec![1.0, 10.0], 1.0).map_err(classify)?;
    let contact = charge.eval(0.0, RayGeometry::default().spectator[2]);
    let radii = log_radii(1e-4, 1e-3, 6);
    let mut lambdas = FIT_LAMBDAS.to_vec();
    if !lambdas.contains(&cfg.lambda) {
        lambdas.push(cfg.lambda);
    }
    let mut out = Vec::new();
    for &m in &cfg.m {
        let mut coeffs = Vec::new();
        for &lambda in &lambdas {
            let ctx = format!("M={m} lambda={lambda} widths=[1,10]");
            let fit = potential_on_ray(&charge, lambda, m, &radii).and_then(|s| asymptotic_fit(&s, contact));
            match fit {
                Ok(f) => {
                    coeffs.push(f.singular_coeff);
                    out.push(f.report.context(ctx));
                }
                Err(e) => out.push(failed_check("potential_fit", ctx, e)),
            }
        }
        if coeffs.len() == lambdas.len() {
            let spread = coeffs.iter().map(|c| ((c - coeffs[0]) / coeffs[0]).abs()).fold(0.0, f64::max);
            out.push(
                BoundReport::upper("singular_coeff_lambda_stable", spread, 0.0, 1e-2)
                    .context(format!("M={m} lambdas={lambdas:?}")),
            );
        }
    }
    let quad = QuadratureSpec::default();
    for a in [0.0, 1.0, 3.0] {
        for x in [0.5, 1.0, 2.0] {
            out.push(match yukawa_transform_check(a, x, &quad) {
                Ok(r) => r,
                Err(e) => failed_check("yukawa_identity", format!("a={a} x={x}"), e),
            });
        }
    }
    Ok(out)
}
