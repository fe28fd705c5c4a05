use hardcore::hamiltonian::hamiltonian_profile;
use hardcore::recursion::MarginalRecursion;
use hardcore::SpinMeasure;

fn profile(lambda: f64, delta: usize, eps: f64) -> hardcore::hamiltonian::HamiltonianProfile {
    let m = if eps == 0.5 {
        SpinMeasure::continuous(lambda).unwrap()
    } else {
        SpinMeasure::eps_interpolated(eps, lambda).unwrap()
    };
    let rep = MarginalRecursion::new(&m, delta, 4096).unwrap().run(10_000, 1e-10).unwrap();
    assert!(rep.converged);
    let (co, ce) = rep.rate_constants(&m);
    hamiltonian_profile(&rep.f_odd, co, ce, lambda, delta, eps).unwrap()
}

#[test]
fn invariant_constant_at_unit_activity() {
    for (delta, eps) in [(2, 0.5), (3, 0.5), (2, 0.25), (3, 0.25)] {
        let p = profile(1.0, delta, eps);
        assert!(p.max_spread_phi() < 1e-6);
        // at λ = 1 the displayed form and the composed form agree
        assert!((p.max_spread_printed() - p.max_spread_phi()).abs() < 1e-9);
        let (e0, e1) = p.endpoint_errors();
        assert!(e0 < 1e-6 && e1 < 1e-6);
    }
}

#[test]
fn composed_form_constant_off_unit_activity() {
    for (lambda, delta, eps) in [(2.0, 2, 0.5), (0.5, 3, 0.5), (2.0, 2, 0.25)] {
        let p = profile(lambda, delta, eps);
        assert!(p.max_spread_phi() < 1e-6, "spread {}", p.max_spread_phi());
        // the displayed third-term exponent is not invariant
        assert!(p.max_spread_printed() > 1e-3);
        assert_eq!(p.intervals.len(), 2);
        assert!((p.intervals[0].end - eps).abs() < 1e-15);
    }
}
