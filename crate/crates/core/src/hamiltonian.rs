//! The conserved quantity of the odd limit `F_o` on the smooth intervals of
//! the density.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridDistribution;
use crate::recursion::thetas;

/// Samples of the invariant on one smooth interval.
#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianInterval {
    pub start: f64,
    pub end: f64,
    pub z: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    /// `R_λ` with the third term weighted by `λ^(-z/(Δ+1))`.
    pub r_printed: Vec<f64>,
    /// `Φ(h1, h2)`; differs from `r_printed` only in the third term's
    /// weight `λ^(-z/Δ)`.
    pub phi: Vec<f64>,
    pub spread_printed: f64,
    pub spread_phi: f64,
    pub mean_phi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianProfile {
    pub delta: usize,
    pub lambda: f64,
    pub eps: f64,
    pub theta_e: f64,
    pub intervals: Vec<HamiltonianInterval>,
    /// `Φ∘h` at `z = 0` and `z = 1`.
    pub endpoint_values: (f64, f64),
    /// `(θ_e C_e)^((Δ+1)/Δ)` and `θ_e^(Δ+1) / λ`.
    pub endpoint_targets: (f64, f64),
}

impl HamiltonianProfile {
    pub fn max_spread_phi(&self) -> f64 {
        self.intervals.iter().map(|i| i.spread_phi).fold(0.0, f64::max)
    }

    pub fn max_spread_printed(&self) -> f64 {
        self.intervals.iter().map(|i| i.spread_printed).fold(0.0, f64::max)
    }

    /// Relative endpoint errors against the targets.
    pub fn endpoint_errors(&self) -> (f64, f64) {
        let (v0, v1) = self.endpoint_values;
        let (t0, t1) = self.endpoint_targets;
        ((v0 - t0).abs() / t0, (v1 - t1).abs() / t1)
    }
}

fn spread(v: &[f64]) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    ((hi - lo) / mean, mean)
}

/// Evaluates the invariant from `F_o` and its derivative.
///
/// `c_odd`, `c_even` are rate constants for the unnormalized density
/// `λ^x` (see [`crate::recursion::RecursionReport::rate_constants`]), and
/// `eps = 0.5` selects the continuous model.
pub fn hamiltonian_profile(
    f_odd: &GridDistribution,
    c_odd: f64,
    c_even: f64,
    lambda: f64,
    delta: usize,
    eps: f64,
) -> Result<HamiltonianProfile> {
    let (_, theta_e) = thetas(lambda, delta, c_odd, c_even).ok_or_else(|| {
        Error::InvalidParameter(format!("the invariant needs delta >= 2, got {delta}"))
    })?;
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1/2], got {eps}")));
    }
    let fd = f_odd.derivative().ok_or(Error::MissingDerivative)?;
    let z = f_odd.grid().points();
    let f = f_odd.values();
    let d = delta as f64;
    let ln_l = lambda.ln();

    let point = |i: usize| {
        let (zi, fi, gi) = (z[i], f[i], fd[i].max(0.0));
        let h1 = lambda.powf(-zi / (d + 1.0)) * theta_e * fi;
        let h2 = lambda.powf(-zi / (d * (d + 1.0))) * theta_e.powf(1.0 / d) * gi.powf(1.0 / d);
        let phi = h1.powf(d + 1.0) + h2.powf(d + 1.0) - ln_l * h1 * h2;
        let printed = lambda.powf(-zi) * (theta_e * fi).powf(d + 1.0)
            + lambda.powf(-zi / d) * (theta_e * gi).powf((d + 1.0) / d)
            - ln_l * lambda.powf(-zi / (d + 1.0)) * theta_e.powf((d + 1.0) / d) * fi * gi.powf(1.0 / d);
        (h1, h2, phi, printed)
    };

    let tol = 1e-12;
    let bounds = [(0.0, eps), (1.0 - eps, 1.0)];
    let mut intervals = Vec::with_capacity(2);
    for (a, b) in bounds {
        let mut iv = HamiltonianInterval {
            start: a,
            end: b,
            z: Vec::new(),
            h1: Vec::new(),
            h2: Vec::new(),
            r_printed: Vec::new(),
            phi: Vec::new(),
            spread_printed: 0.0,
            spread_phi: 0.0,
            mean_phi: 0.0,
        };
        for i in 0..z.len() {
            if z[i] < a - tol || z[i] > b + tol {
                continue;
            }
            let (h1, h2, phi, printed) = point(i);
            iv.z.push(z[i]);
            iv.h1.push(h1);
            iv.h2.push(h2);
            iv.phi.push(phi);
            iv.r_printed.push(printed);
        }
        if iv.z.is_empty() {
            return Err(Error::InvalidParameter(format!("no grid points in [{a}, {b}]")));
        }
        (iv.spread_phi, iv.mean_phi) = spread(&iv.phi);
        iv.spread_printed = spread(&iv.r_printed).0;
        intervals.push(iv);
    }
    let endpoint_values = (point(0).2, point(z.len() - 1).2);
    let endpoint_targets = (
        (theta_e * c_even).powf((d + 1.0) / d),
        theta_e.powf(d + 1.0) / lambda,
    );
    Ok(HamiltonianProfile {
        delta,
        lambda,
        eps,
        theta_e,
        intervals,
        endpoint_values,
        endpoint_targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SpinMeasure;
    use crate::recursion::MarginalRecursion;

    #[test]
    fn delta_one_rejected() {
        let r = MarginalRecursion::new(&SpinMeasure::continuous(1.0).unwrap(), 1, 64).unwrap();
        let f = r.initial();
        assert!(hamiltonian_profile(&f, 1.0, 1.0, 1.0, 1, 0.5).is_err());
    }

    #[test]
    fn uniform_delta_two_is_c_cubed() {
        let m = SpinMeasure::continuous(1.0).unwrap();
        let rep = MarginalRecursion::new(&m, 2, 1024).unwrap().run(5000, 1e-10).unwrap();
        let (co, ce) = rep.rate_constants(&m);
        let p = hamiltonian_profile(&rep.f_odd, co, ce, 1.0, 2, 0.5).unwrap();
        let c3 = ce.powi(3);
        for iv in &p.intervals {
            assert!(iv.spread_phi < 1e-6, "spread {}", iv.spread_phi);
            assert!((iv.mean_phi - c3).abs() / c3 < 1e-6);
            let diff = iv.phi.iter().zip(&iv.r_printed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-12 * c3);
        }
        let (e0, e1) = p.endpoint_errors();
        assert!(e0 < 1e-6 && e1 < 1e-6);
    }
}
