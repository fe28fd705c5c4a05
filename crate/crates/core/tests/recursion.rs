use hardcore::recursion::{check_monotonicity, exact_tree_log_volume, run_recursion, MarginalRecursion, RecursionOptions};
use hardcore::volume::mc_volume_sis;
use hardcore::graph::regular_tree;
use hardcore::SpinMeasure;
use proptest::prelude::*;

fn measure(kind: u8, lambda: f64) -> SpinMeasure {
    match kind {
        0 => SpinMeasure::continuous(lambda).unwrap(),
        1 => SpinMeasure::two_state(lambda).unwrap(),
        2 => SpinMeasure::multi_state(3, lambda).unwrap(),
        _ => SpinMeasure::eps_interpolated(0.2, lambda).unwrap(),
    }
}

#[test]
fn star_and_binary_tree_volumes() {
    let m = SpinMeasure::continuous(1.0).unwrap();
    // star with 2 leaves: ∫ (1-x)^2 dx = 1/3
    let star = exact_tree_log_volume(&m, 2, 1, 4096).unwrap();
    assert!((star - (1.0f64 / 3.0).ln()).abs() < 1e-10);
    let t22 = exact_tree_log_volume(&m, 2, 2, 4096).unwrap();
    assert!((t22 - (1.0f64 / 14.0).ln()).abs() < 1e-9);
    let sis = mc_volume_sis(&regular_tree(2, 2).unwrap(), &m, 50_000, 9).unwrap();
    assert!((sis.log_z - t22).abs() < 3.0 * sis.std_err);
}

#[test]
fn two_state_tree_counts_independent_sets() {
    // λ = 1: depth-1 binary tree has 5 independent sets
    let m = SpinMeasure::two_state(1.0).unwrap();
    let z = exact_tree_log_volume(&m, 2, 1, 64).unwrap();
    assert!((z - 5f64.ln()).abs() < 1e-12);
    let z2 = exact_tree_log_volume(&m, 2, 2, 64).unwrap();
    // root out: 5 * 5; root in: the four grandchildren are free, 2^4
    assert!((z2 - 41f64.ln()).abs() < 1e-12);
}

#[test]
fn options_front_end() {
    let m = SpinMeasure::continuous(0.7).unwrap();
    let opts = RecursionOptions { max_depth: 3000, tol: 1e-9, intervals: 1024 };
    let rep = run_recursion(&m, 3, &opts).unwrap();
    assert!(rep.converged);
    assert!(rep.relation_residual < 1e-8);
    assert_eq!(rep.monotonicity_violations, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn iterates_are_cdfs(kind in 0u8..4, lambda in 0.2f64..4.0, delta in 1usize..5, depth in 1usize..8) {
        let m = measure(kind, lambda);
        let rec = MarginalRecursion::new(&m, delta, 256).unwrap();
        for f in rec.history(depth).unwrap() {
            let v = f.values();
            prop_assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-14));
            prop_assert!((v[v.len() - 1] - 1.0).abs() < 1e-12);
            prop_assert!(v.iter().all(|x| (-1e-14..=1.0 + 1e-14).contains(x)));
        }
    }

    /// Odd iterates decrease, even iterates increase, and every even one
    /// lies below every odd one.
    #[test]
    fn odd_even_bracketing(kind in 0u8..4, lambda in 0.2f64..4.0, delta in 1usize..5) {
        let m = measure(kind, lambda);
        let rec = MarginalRecursion::new(&m, delta, 256).unwrap();
        let hist = rec.history(10).unwrap();
        prop_assert_eq!(check_monotonicity(&hist, 1e-10), 0);
    }

    /// Larger activity moves root mass towards 1, so `F` decreases
    /// pointwise at depth 1, and the tree volume grows.
    #[test]
    fn lambda_monotone(lambda in 0.2f64..3.0, bump in 0.05f64..1.0, delta in 1usize..4) {
        let lo = SpinMeasure::continuous(lambda).unwrap();
        let hi = SpinMeasure::continuous(lambda + bump).unwrap();
        let a = MarginalRecursion::new(&lo, delta, 256).unwrap().initial();
        let b = MarginalRecursion::new(&hi, delta, 256).unwrap().initial();
        prop_assert!(b.values().iter().zip(a.values()).all(|(x, y)| *x <= *y + 1e-14));
        let za = exact_tree_log_volume(&lo, delta, 3, 256).unwrap();
        let zb = exact_tree_log_volume(&hi, delta, 3, 256).unwrap();
        prop_assert!(zb > za);
    }

    /// Scaling the measure by a constant leaves the marginals unchanged.
    #[test]
    fn scale_invariance(lambda in 0.3f64..3.0, c in 0.1f64..10.0, delta in 1usize..4) {
        let m = SpinMeasure::continuous(lambda).unwrap();
        let s = m.scaled(c).unwrap();
        let a = MarginalRecursion::new(&m, delta, 128).unwrap().history(4).unwrap();
        let b = MarginalRecursion::new(&s, delta, 128).unwrap().history(4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x.sup_distance(y) < 1e-12);
        }
    }
}
