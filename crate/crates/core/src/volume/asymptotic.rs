//! Per-node limit `γ` of `log Z` for large-girth regular graphs and the
//! rewiring ratio, from the tree limit CDF.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use super::sis::{mc_volume_sis_with, SisOptions};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::grid::{fmt17, GridDistribution, Quadrature, DEFAULT_INTERVALS};
use crate::measure::SpinMeasure;
use crate::recursion::MarginalRecursion;

/// Sign of the first term in `γ` and power of the first factor in `Γ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignVariant {
    /// `+ln A` in `γ`, `A^2` in `Γ`: matches the matching and cycle oracles.
    #[default]
    Corrected,
    /// `-ln A` in `γ`, `A^-2` in `Γ`.
    AsPrinted,
}

impl std::str::FromStr for SignVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "as-printed" | "as_printed" => Ok(Self::AsPrinted),
            _ => Err(Error::InvalidParameter(format!("unknown sign variant {s:?}"))),
        }
    }
}

/// `A = ∫ λ^x F^Δ(1-x) dx` and `B = ∫ F(1-x) dF(x)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LimitIntegrals {
    pub a: f64,
    pub b: f64,
}

pub fn limit_integrals(delta: usize, lambda: f64, f: &GridDistribution) -> Result<LimitIntegrals> {
    let fdot = f.derivative().ok_or(Error::MissingDerivative)?;
    let grid = Arc::clone(f.grid());
    let refl: Vec<f64> = (0..grid.len()).map(|i| f.values()[grid.reflect(i)]).collect();
    let pow: Vec<f64> = refl.iter().map(|v| v.powi(delta as i32)).collect();
    let a = Quadrature::new(Arc::clone(&grid), &SpinMeasure::continuous(lambda)?)?.integral(&pow);
    let prod: Vec<f64> = fdot.iter().zip(&refl).map(|(d, r)| d * r).collect();
    let jumps: f64 = f.jumps().iter().map(|&(loc, size)| size * f.eval(1.0 - loc)).sum();
    let b = Quadrature::new(grid, &SpinMeasure::continuous(1.0)?)?.integral(&prod) + jumps;
    Ok(LimitIntegrals { a, b })
}

/// `γ = ±ln A - (Δ/2) ln B` for graph degree `delta`, where `f` is the
/// tree limit with branching `delta - 1`.
pub fn gamma_asymptotic(delta: usize, lambda: f64, f: &GridDistribution, sign: SignVariant) -> Result<f64> {
    let LimitIntegrals { a, b } = limit_integrals(delta, lambda, f)?;
    let s = match sign {
        SignVariant::Corrected => 1.0,
        SignVariant::AsPrinted => -1.0,
    };
    Ok(s * a.ln() - 0.5 * delta as f64 * b.ln())
}

/// `Γ = A^(±2) B^(-Δ)`, the limit of `Z_G / Z_H` for one rewiring step.
pub fn rewire_ratio(delta: usize, lambda: f64, f: &GridDistribution, sign: SignVariant) -> Result<f64> {
    let LimitIntegrals { a, b } = limit_integrals(delta, lambda, f)?;
    let p = match sign {
        SignVariant::Corrected => 2,
        SignVariant::AsPrinted => -2,
    };
    Ok(a.powi(p) * b.powi(-(delta as i32)))
}

/// `(r1, r2) = (A^-2, B^Δ)`, approximating `Z_{G - u1 - u2} / Z_G` and
/// `Z_H / Z_{G - u1 - u2}`.
pub fn ratio_lemma_check(delta: usize, lambda: f64, f: &GridDistribution) -> Result<(f64, f64)> {
    let LimitIntegrals { a, b } = limit_integrals(delta, lambda, f)?;
    Ok((a.powi(-2), b.powi(delta as i32)))
}

/// Limit CDF of the tree recursion with the given branching on the default
/// grid; branching 0 gives `F_0`. Fails when the recursion does not
/// converge.
pub fn limit_cdf(branching: usize, m: &SpinMeasure) -> Result<GridDistribution> {
    if branching == 0 {
        return Ok(MarginalRecursion::new(m, 1, DEFAULT_INTERVALS)?.initial());
    }
    let report = MarginalRecursion::new(m, branching, DEFAULT_INTERVALS)?.run(10_000, 1e-10)?;
    if !report.converged {
        return Err(Error::InvalidParameter(format!(
            "recursion with branching {branching} did not converge (gap {:.3e})",
            report.gap_sup
        )));
    }
    Ok(report.f_odd)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TrajectoryPoint {
    pub n: usize,
    pub log_z_per_node: f64,
    pub std_err: f64,
}

/// Per-node SIS `log Z` for each graph.
pub fn empirical_gamma(graphs: &[Graph], m: &SpinMeasure, opts: &SisOptions) -> Result<Vec<TrajectoryPoint>> {
    graphs
        .iter()
        .map(|g| {
            let est = mc_volume_sis_with(g, m, opts)?;
            let n = g.n() as f64;
            Ok(TrajectoryPoint { n: g.n(), log_z_per_node: est.log_z / n, std_err: est.std_err / n })
        })
        .collect()
}

/// CSV with header `n,logZ_per_node,std_err`.
pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from("n,logZ_per_node,std_err\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.n, fmt17(p.log_z_per_node), fmt17(p.std_err));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn sine() -> GridDistribution {
        let grid = Arc::new(Grid::uniform(4096).unwrap());
        let v = grid.points().iter().map(|z| (FRAC_PI_2 * z).sin()).collect();
        let d = grid.points().iter().map(|z| FRAC_PI_2 * (FRAC_PI_2 * z).cos()).collect();
        GridDistribution::new(grid, v, vec![], Some(d)).unwrap()
    }

    #[test]
    fn matching_gamma() {
        let f = limit_cdf(0, &SpinMeasure::continuous(1.0).unwrap()).unwrap();
        let g = gamma_asymptotic(1, 1.0, &f, SignVariant::Corrected).unwrap();
        assert!((g - 0.5 * 0.5f64.ln()).abs() < 1e-12);
        let p = gamma_asymptotic(1, 1.0, &f, SignVariant::AsPrinted).unwrap();
        // -ln(1/2) - (1/2) ln(1/2)
        assert!((p - 1.5 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cycle_gamma_and_ratios() {
        let f = sine();
        let g = gamma_asymptotic(2, 1.0, &f, SignVariant::Corrected).unwrap();
        assert!((g - (2.0 / PI).ln()).abs() < 1e-10);
        let r = rewire_ratio(2, 1.0, &f, SignVariant::Corrected).unwrap();
        assert!((r - 4.0 / (PI * PI)).abs() < 1e-10);
        assert!(((2.0 * g).exp() - r).abs() < 1e-12);
        let printed = rewire_ratio(2, 1.0, &f, SignVariant::AsPrinted).unwrap();
        assert!((printed - 64.0 / (PI * PI)).abs() < 1e-8);
        let (r1, r2) = ratio_lemma_check(2, 1.0, &f).unwrap();
        assert!((r1 - 4.0).abs() < 1e-9);
        assert!((r2 - PI * PI / 16.0).abs() < 1e-10);
        assert!((1.0 / (r1 * r2) - r).abs() < 1e-12);
    }

    #[test]
    fn needs_derivative() {
        let grid = Arc::new(Grid::uniform(8).unwrap());
        let f = GridDistribution::new(Arc::clone(&grid), grid.points().to_vec(), vec![], None).unwrap();
        assert!(matches!(gamma_asymptotic(1, 1.0, &f, SignVariant::Corrected), Err(Error::MissingDerivative)));
    }

    #[test]
    fn sign_strings() {
        assert_eq!("as-printed".parse::<SignVariant>().unwrap(), SignVariant::AsPrinted);
        assert!("both".parse::<SignVariant>().is_err());
    }
}
