use std::f64::consts::PI;

use proptest::prelude::*;
use stm_reg::specfun::{gamma, hyp2f1_conj, legendre_p, pochhammer, double_factorial, HyperParams};

// P_ℓ coefficients from Rodrigues' formula, exact in integers: 2^ℓ ℓ! P_ℓ = d^ℓ/dx^ℓ (x²−1)^ℓ
fn rodrigues(ell: u32) -> Vec<f64> {
    let l = ell as i128;
    let fact = |n: i128| (1..=n).product::<i128>();
    let binom = |n: i128, k: i128| fact(n) / (fact(k) * fact(n - k));
    let scale = (1i128 << l) * fact(l);
    let mut coeffs = vec![0.0; ell as usize + 1];
    for k in 0..=l {
        let power = 2 * k;
        if power < l {
            continue;
        }
        let sign = if (l - k) % 2 == 0 { 1 } else { -1 };
        let c = sign * binom(l, k) * fact(power) / fact(power - l);
        coeffs[(power - l) as usize] = c as f64 / scale as f64;
    }
    coeffs
}

#[test]
fn legendre_matches_rodrigues_at_chebyshev_nodes() {
    for ell in 0..=8u32 {
        let c = rodrigues(ell);
        for j in 0..21 {
            let y = ((2 * j + 1) as f64 * PI / 42.0).cos();
            let direct = c.iter().rev().fold(0.0, |acc, &a| acc * y + a);
            let rec = legendre_p(ell, y).unwrap();
            assert!((rec - direct).abs() <= 1e-12, "ell={ell} y={y}: {rec} vs {direct}");
        }
    }
}

#[test]
fn duplication_formula() {
    for z in [0.5, 1.0, 1.5, 2.5] {
        let lhs = gamma(z) * gamma(z + 0.5);
        let rhs = 2f64.powf(1.0 - 2.0 * z) * PI.sqrt() * gamma(2.0 * z);
        assert!(((lhs - rhs) / rhs).abs() <= 1e-12, "z={z}");
    }
}

#[test]
fn half_integer_pochhammer_exact() {
    for k in 0..=15u32 {
        let want = if k == 0 { 1.0 } else { double_factorial(2 * k - 1) as f64 / 2f64.powi(k as i32) };
        assert_eq!(pochhammer(0.5, k), want, "k={k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hyp_even_in_p(ell in (0u32..=8).prop_map(|l| 2 * l), p in 0.0f64..40.0, x in 0.0f64..1.0) {
        let a = hyp2f1_conj(HyperParams::new(ell, p, x).unwrap()).unwrap();
        let b = hyp2f1_conj(HyperParams::new(ell, -p, x).unwrap()).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn hyp_nondecreasing_in_x(ell in (0u32..=8).prop_map(|l| 2 * l), p in 0.0f64..20.0, x in 0.0f64..0.999, dx in 1e-6f64..1e-1) {
        let x2 = (x + dx).min(0.9999);
        let a = hyp2f1_conj(HyperParams::new(ell, p, x).unwrap()).unwrap();
        let b = hyp2f1_conj(HyperParams::new(ell, p, x2).unwrap()).unwrap();
        prop_assert!(b >= a * (1.0 - 1e-13), "x={} {} -> x={} {}", x, a, x2, b);
    }

    #[test]
    fn legendre_bounded(ell in 0u32..40, y in -1.0f64..=1.0) {
        prop_assert!(legendre_p(ell, y).unwrap().abs() <= 1.0 + 1e-13);
    }
}
