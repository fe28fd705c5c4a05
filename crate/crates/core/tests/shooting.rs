use std::f64::consts::FRAC_PI_2;

use hardcore::recursion::MarginalRecursion;
use hardcore::shooting::{find_cstar, integrate_to_threshold, sensitivity, tau};
use hardcore::SpinMeasure;
use proptest::prelude::*;
use statrs::function::beta::beta;

/// `C* = ∫_0^1 (1 - y^(Δ+1))^(-Δ/(Δ+1)) dy = B(1/(Δ+1), 1/(Δ+1)) / (Δ+1)`.
fn cstar_oracle(delta: usize) -> f64 {
    let p = 1.0 / (delta as f64 + 1.0);
    beta(p, p) * p
}

#[test]
fn cstar_matches_beta_oracle() {
    for delta in 1..=5 {
        let res = find_cstar(delta, 1e-10).unwrap();
        let exact = cstar_oracle(delta);
        assert!((res.c_star - exact).abs() < 1e-6, "Δ={delta}: {} vs {exact}", res.c_star);
    }
    assert!((cstar_oracle(1) - FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn profile_is_sine_for_delta_one() {
    let res = find_cstar(1, 1e-10).unwrap();
    let d = res.f.derivative().unwrap();
    for (i, &z) in res.f.grid().points().iter().enumerate() {
        assert!((res.f.values()[i] - (FRAC_PI_2 * z).sin()).abs() < 1e-8);
        assert!((d[i] - FRAC_PI_2 * (FRAC_PI_2 * z).cos()).abs() < 1e-6);
    }
    let csv = res.to_csv();
    assert!(csv.starts_with("z,F,Fdot\n"));
    assert_eq!(csv.lines().count(), 4098);
}

#[test]
fn shooting_matches_recursion_limits() {
    let m = SpinMeasure::continuous(1.0).unwrap();
    for delta in 1..=3 {
        let s = find_cstar(delta, 1e-10).unwrap();
        let rep = MarginalRecursion::new(&m, delta, 4096).unwrap().run(5000, 1e-10).unwrap();
        assert!(rep.converged);
        assert!(s.f.sup_distance(&rep.f_odd) < 1e-6);
        assert!((s.c_star - rep.c_even).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// τ scales as 1/C: the ODE is autonomous in `C z`.
    #[test]
    fn tau_scales_inversely(c in 0.3f64..8.0, delta in 1usize..5) {
        let t1 = tau(c, delta, 1e-6).unwrap();
        let t2 = tau(2.0 * c, delta, 1e-6).unwrap();
        prop_assert!((t1 - 2.0 * t2).abs() < 1e-6 * t1);
        prop_assert!((t1 * c - cstar_oracle(delta)).abs() < 2e-6);
    }

    #[test]
    fn trajectory_is_a_cdf(c in 0.5f64..5.0, delta in 0usize..5) {
        let tr = integrate_to_threshold(c, delta, 1e-6, 1e-3).unwrap();
        prop_assert_eq!(tr.values[0], 0.0);
        prop_assert!(tr.values.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(tr.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn sensitivity_positive(c in 0.5f64..4.0, delta in 1usize..4) {
        let s = sensitivity(c, delta, 0.95, 1e-3).unwrap();
        prop_assert!(s.r[1..].iter().all(|&r| r > 0.0));
    }
}
