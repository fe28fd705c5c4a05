use std::f64::consts::PI;

use hardcore::graph::{complete, cycle, path, perfect_matching, Graph};
use hardcore::volume::{
    gamma_asymptotic, limit_cdf, mc_volume_sis, mc_volume_sis_with, rewire_ratio, trajectory_csv,
    transfer_cycle_log_z, transfer_path_log_z, empirical_gamma, Proposal, SignVariant, SisOptions,
};
use hardcore::SpinMeasure;
use proptest::prelude::*;

/// `Z(edge) = ∫_0^1 s λ^s ds`.
fn edge_z(lambda: f64) -> f64 {
    if (lambda - 1.0).abs() < 1e-12 {
        return 0.5;
    }
    let l = lambda.ln();
    lambda / l - (lambda - 1.0) / (l * l)
}

#[test]
fn small_graph_volumes() {
    let m = SpinMeasure::continuous(1.0).unwrap();
    for (g, z) in [
        (path(2).unwrap(), 0.5),
        (path(3).unwrap(), 1.0 / 3.0),
        (complete(3).unwrap(), 0.25),
    ] {
        let est = mc_volume_sis(&g, &m, 100_000, 1).unwrap();
        assert!((est.log_z - f64::ln(z)).abs() <= 3.0 * est.std_err, "{est:?}");
        assert!(est.std_err <= 0.01);
    }
}

#[test]
fn matching_is_a_product() {
    let m = SpinMeasure::continuous(1.0).unwrap();
    let g = perfect_matching(20).unwrap().into_graph();
    let est = mc_volume_sis(&g, &m, 20_000, 5).unwrap();
    assert!((est.log_z - 10.0 * 0.5f64.ln()).abs() <= 3.0 * est.std_err + 1e-9);
    let f0 = limit_cdf(0, &m).unwrap();
    let gamma = gamma_asymptotic(1, 1.0, &f0, SignVariant::Corrected).unwrap();
    assert!((gamma - est.log_z_per_node()).abs() < 0.01);
}

#[test]
fn disconnected_graph_sums_components() {
    let m = SpinMeasure::continuous(1.0).unwrap();
    let g = Graph::new(5, &[(0, 1), (2, 3), (3, 4)]).unwrap();
    let est = mc_volume_sis(&g, &m, 50_000, 2).unwrap();
    let exact = 0.5f64.ln() + (1.0f64 / 3.0).ln();
    assert!((est.log_z - exact).abs() <= 3.0 * est.std_err);
}

#[test]
fn cavity_proposal_on_cycle_matches_transfer() {
    let m = SpinMeasure::continuous(1.0).unwrap();
    let t = transfer_cycle_log_z(16, &m, 1024).unwrap();
    let mut opts = SisOptions::new(50_000, 4);
    opts.proposal = Proposal::Cavity;
    let est = mc_volume_sis_with(&cycle(16).unwrap(), &m, &opts).unwrap();
    let exact = t.richardson.unwrap();
    assert!((est.log_z - exact).abs() <= 4.0 * est.std_err, "{} vs {exact}", est.log_z);
    // the cavity proposal is far tighter than the prior on cycles
    let prior = mc_volume_sis(&cycle(16).unwrap(), &m, 50_000, 4).unwrap();
    assert!(est.std_err < prior.std_err);
}

#[test]
fn sis_independent_of_thread_count() {
    let m = SpinMeasure::continuous(1.5).unwrap();
    let g = cycle(9).unwrap().into_graph();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_volume_sis(&g, &m, 5_000, 77).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.log_z.to_bits(), b.log_z.to_bits());
    assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
}

#[test]
fn cycle_ratio_approaches_gamma_ratio() {
    let m = SpinMeasure::continuous(1.0).unwrap();
    let a = transfer_cycle_log_z(20, &m, 1024).unwrap();
    let b = transfer_cycle_log_z(18, &m, 1024).unwrap();
    let f = limit_cdf(1, &m).unwrap();
    let ratio = rewire_ratio(2, 1.0, &f, SignVariant::Corrected).unwrap();
    assert!(((a.log_z - b.log_z).exp() / ratio - 1.0).abs() < 1e-3);
    assert!((ratio - 4.0 / (PI * PI)).abs() < 1e-6);
    let printed = rewire_ratio(2, 1.0, &f, SignVariant::AsPrinted).unwrap();
    assert!((printed / ratio - 16.0).abs() < 1e-4);
}

#[test]
fn trajectory_output() {
    let m = SpinMeasure::continuous(1.0).unwrap();
    let graphs: Vec<Graph> = [6, 10].iter().map(|&n| cycle(n).unwrap().into_graph()).collect();
    let pts = empirical_gamma(&graphs, &m, &SisOptions::new(2_000, 3)).unwrap();
    let csv = trajectory_csv(&pts);
    assert!(csv.starts_with("n,logZ_per_node,std_err\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn record_fields() {
    let m = SpinMeasure::continuous(1.0).unwrap();
    let mut opts = SisOptions::new(1_000, 8);
    opts.graph_label = "triangle".into();
    let est = mc_volume_sis_with(&complete(3).unwrap(), &m, &opts).unwrap();
    let v = serde_json::to_value(&est).unwrap();
    for key in ["graph", "n_nodes", "lambda", "measure", "method", "log_Z", "std_err", "samples", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["method"], "sis");
    assert_eq!(v["graph"], "triangle");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn edge_volume_any_lambda(lambda in 0.2f64..5.0) {
        let m = SpinMeasure::continuous(lambda).unwrap();
        let exact = edge_z(lambda).ln();
        let t = transfer_path_log_z(2, &m, 512).unwrap();
        prop_assert!((t.richardson.unwrap() - exact).abs() < 1e-5);
        let est = mc_volume_sis(&path(2).unwrap(), &m, 20_000, 1).unwrap();
        prop_assert!((est.log_z - exact).abs() <= 4.0 * est.std_err);
    }

    /// `log Z` is increasing in `λ` (the weights `λ^Σx` are).
    #[test]
    fn path_volume_monotone_in_lambda(lambda in 0.2f64..4.0, bump in 0.05f64..1.0, n in 2usize..8) {
        let a = transfer_path_log_z(n, &SpinMeasure::continuous(lambda).unwrap(), 256).unwrap();
        let b = transfer_path_log_z(n, &SpinMeasure::continuous(lambda + bump).unwrap(), 256).unwrap();
        prop_assert!(b.log_z > a.log_z);
    }

    /// Adding an edge can only shrink the polytope.
    #[test]
    fn cycle_below_path(n in 3usize..12) {
        let m = SpinMeasure::continuous(1.0).unwrap();
        let c = transfer_cycle_log_z(n, &m, 256).unwrap();
        let p = transfer_path_log_z(n, &m, 256).unwrap();
        prop_assert!(c.log_z < p.log_z);
    }
}
