//! Root-marginal recursion on the rooted tree in which every node has
//! `delta` children.
//!
//! With `F_n` the distribution function of the root spin on the depth-`n`
//! tree under free boundary conditions,
//!
//! ```text
//! F_n(z) = ∫_{[0,z]} F_{n-1}(1-x)^Δ μ(dx) / ∫_{[0,1]} F_{n-1}(1-t)^Δ μ(dt)
//! ```
//!
//! and the denominator equals `Z_n / Z_{n-1}^Δ`. Odd and even iterates are
//! monotone in opposite directions and bracket their limits `F_o >= F_e`;
//! uniqueness of the Gibbs measure is equivalent to `F_o = F_e`, i.e.
//! `C_o = C_e` with `C = 1 / ∫ F^Δ(1-t) μ(dt)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridDistribution, Quadrature, DEFAULT_INTERVALS};
use crate::measure::SpinMeasure;

/// Pointwise slack when counting monotonicity violations.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Same-parity increments below this mean the two-step map has reached a
/// numerical fixed point.
const STALL_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecursionOptions {
    pub max_depth: usize,
    pub tol: f64,
    pub intervals: usize,
}

impl Default for RecursionOptions {
    fn default() -> Self {
        Self { max_depth: 10_000, tol: 1e-8, intervals: DEFAULT_INTERVALS }
    }
}

/// Boundary condition imposed on the leaves of the depth-`n` tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Free,
    Zeros,
    Ones,
}

/// Per-run diagnostics of [`MarginalRecursion::run`].
#[derive(Clone, Debug, Serialize)]
pub struct RecursionReport {
    pub delta: usize,
    pub depth_reached: usize,
    /// `Z_n / Z_{n-1}^Δ` for `n = 1..=depth_reached`.
    pub ratios: Vec<f64>,
    /// `ln Z` of the depth-`depth_reached` tree; `None` once it leaves the
    /// range of `f64`.
    pub log_z: Option<f64>,
    pub log_z_per_node: f64,
    #[serde(skip)]
    pub f_odd: GridDistribution,
    #[serde(skip)]
    pub f_even: GridDistribution,
    pub depth_odd: usize,
    pub depth_even: usize,
    pub c_odd: f64,
    pub c_even: f64,
    pub theta_odd: Option<f64>,
    pub theta_even: Option<f64>,
    pub gap_sup: f64,
    /// `(depth, gap_sup)` at depths `2, 4, 8, ...` and at exit.
    pub checkpoints: Vec<(usize, f64)>,
    /// `sup |F_odd - C_e ∫_0^z F_even^Δ(1-t) μ(dt)|`.
    pub relation_residual: f64,
    pub converged: bool,
    pub monotonicity_violations: usize,
}

impl RecursionReport {
    /// `|C_o - C_e| / C_e`.
    pub fn c_gap(&self) -> f64 {
        (self.c_odd - self.c_even).abs() / self.c_even
    }

    /// `C_o, C_e` rescaled to the unnormalized density `lambda^x`, the
    /// convention of the Hamiltonian and second-order ODE checks.
    pub fn rate_constants(&self, measure: &SpinMeasure) -> (f64, f64) {
        let s = measure.density_scale().unwrap_or(1.0);
        (self.c_odd * s, self.c_even * s)
    }
}

/// `θ_o, θ_e` from `C_o, C_e`; undefined for `delta < 2`.
pub fn thetas(lambda: f64, delta: usize, c_odd: f64, c_even: f64) -> Option<(f64, f64)> {
    if delta < 2 {
        return None;
    }
    let d = delta as f64;
    let p = d / (d * d - 1.0);
    let theta_o = (lambda * c_odd.powf(1.0 / d) * c_even).powf(p);
    let theta_e = (lambda * c_even.powf(1.0 / d) * c_odd).powf(p);
    Some((theta_o, theta_e))
}

/// The recursion for a fixed measure, branching factor and grid.
#[derive(Clone, Debug)]
pub struct MarginalRecursion {
    measure: SpinMeasure,
    delta: usize,
    quad: Quadrature,
}

impl MarginalRecursion {
    pub fn new(measure: &SpinMeasure, delta: usize, intervals: usize) -> Result<Self> {
        if delta < 1 {
            return Err(Error::InvalidParameter("delta must be >= 1".into()));
        }
        let grid = Arc::new(Grid::for_measure(measure, intervals)?);
        Self::on_grid(measure, delta, grid)
    }

    pub fn on_grid(measure: &SpinMeasure, delta: usize, grid: Arc<Grid>) -> Result<Self> {
        let quad = Quadrature::new(grid, measure)?;
        Ok(Self { measure: measure.clone(), delta, quad })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.quad.grid()
    }

    pub fn measure(&self) -> &SpinMeasure {
        &self.measure
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// `F_0(z) = μ[0,z] / μ[0,1]`.
    pub fn initial(&self) -> GridDistribution {
        initial_marginal_on(&self.measure, Arc::clone(self.grid()))
    }

    /// One step of the recursion; returns `(F_next, Z_n / Z_{n-1}^Δ)`.
    pub fn iterate(&self, prev: &GridDistribution) -> Result<(GridDistribution, f64)> {
        let grid = self.grid();
        let v = prev.values();
        let n = grid.len();
        let reflected: Vec<f64> = (0..n).map(|i| v[grid.reflect(i)].powi(self.delta as i32)).collect();
        let mut cum = self.quad.cumulative(&reflected);
        let ratio = cum[n - 1];
        if !(ratio.is_finite() && ratio > f64::MIN_POSITIVE) {
            return Err(Error::RatioUnderflow { depth: 0 });
        }
        let inv = 1.0 / ratio;
        cum.iter_mut().for_each(|a| *a *= inv);
        cum[n - 1] = 1.0;
        let jumps = self
            .measure
            .atoms()
            .iter()
            .map(|a| {
                let i = grid.index_of(a.location).expect("atoms lie on the grid");
                (a.location, a.weight * reflected[i] * inv)
            })
            .collect();
        let derivative = self.measure.has_density().then(|| {
            grid.points()
                .iter()
                .zip(&reflected)
                .map(|(&z, &g)| g * self.measure.density(z) * inv)
                .collect()
        });
        let next = GridDistribution::new(Arc::clone(grid), cum, jumps, derivative)?;
        Ok((next, ratio))
    }

    /// `C = (∫ F^Δ(1-t) μ(dt))^{-1}`.
    pub fn constant(&self, f: &GridDistribution) -> f64 {
        let grid = self.grid();
        let v = f.values();
        let g: Vec<f64> = (0..grid.len()).map(|i| v[grid.reflect(i)].powi(self.delta as i32)).collect();
        1.0 / self.quad.integral(&g)
    }

    /// The first `depth + 1` free-boundary iterates `F_0, ..., F_depth`.
    pub fn history(&self, depth: usize) -> Result<Vec<GridDistribution>> {
        let mut out = vec![self.initial()];
        for k in 1..=depth {
            let (next, _) = self.iterate(&out[k - 1]).map_err(|e| with_depth(e, k))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Root marginal of the depth-`depth` tree under a constant boundary.
    ///
    /// Leaves pinned at `0` leave their parents unconstrained, and leaves
    /// pinned at `1` pin their parents at `0`; the recursion then proceeds
    /// from the first free layer.
    pub fn boundary_marginal(&self, depth: usize, boundary: Boundary) -> Result<GridDistribution> {
        enum Layer {
            Pinned(bool),
            Free(GridDistribution),
        }
        let mut layer = match boundary {
            Boundary::Free => Layer::Free(self.initial()),
            Boundary::Zeros => Layer::Pinned(false),
            Boundary::Ones => Layer::Pinned(true),
        };
        for k in 1..=depth {
            layer = match layer {
                Layer::Pinned(true) => Layer::Pinned(false),
                Layer::Pinned(false) => Layer::Free(self.initial()),
                Layer::Free(f) => Layer::Free(self.iterate(&f).map_err(|e| with_depth(e, k))?.0),
            };
        }
        match layer {
            Layer::Free(f) => Ok(f),
            Layer::Pinned(one) => {
                GridDistribution::point_mass(Arc::clone(self.grid()), if one { 1.0 } else { 0.0 })
            }
        }
    }

    /// Iterate until odd and even iterates agree to `tol` (both in sup norm
    /// and in relative `C` gap), the two-step map stalls, or `max_depth`.
    pub fn run(&self, max_depth: usize, tol: f64) -> Result<RecursionReport> {
        if max_depth < 2 {
            return Err(Error::InvalidParameter("max_depth must be >= 2".into()));
        }
        let delta = self.delta;
        let d = delta as f64;
        let n = self.grid().len();

        let mut log_z = self.measure.total_mass().ln();
        let mut log_z_per_node = log_z;
        let mut inv_nodes = 1.0_f64;
        let mut ratios = Vec::new();

        // At the top of each round: cur = F_{k-1}, older = (F_{k-2}, C(F_{k-2})).
        let mut older: Option<(GridDistribution, f64)> = None;
        let mut cur = self.initial();
        let mut min_odd = vec![f64::INFINITY; n];
        let mut max_even = cur.values().to_vec();
        let mut violations = 0usize;
        let mut checkpoints = Vec::new();
        let mut next_checkpoint = 2usize;
        let mut converged = false;
        let mut gap = f64::INFINITY;
        let mut depth = 0usize;

        let (last, second) = loop {
            depth += 1;
            let (next, ratio) = self.iterate(&cur).map_err(|e| with_depth(e, depth))?;
            ratios.push(ratio);
            log_z = ratio.ln() + d * log_z;
            inv_nodes = inv_nodes / (inv_nodes + d);
            log_z_per_node = (1.0 - inv_nodes) * log_z_per_node + inv_nodes * ratio.ln();
            let c_cur = 1.0 / ratio;

            let odd = depth % 2 == 1;
            let (extreme, bound_sign) = if odd { (&max_even, -1.0) } else { (&min_odd, 1.0) };
            violations += count_violations(next.values(), extreme, bound_sign);
            let mut stalled = false;
            if let Some((f2, c2)) = &older {
                violations += count_violations(next.values(), f2.values(), if odd { 1.0 } else { -1.0 });
                gap = cur.sup_distance(f2);
                let c_gap = (c_cur - c2).abs() / c_cur.min(*c2);
                if depth >= next_checkpoint {
                    checkpoints.push((depth, gap));
                    next_checkpoint *= 2;
                }
                converged = gap <= tol && c_gap <= tol;
                stalled = next.sup_distance(f2) <= STALL_TOL;
            }
            if odd {
                min_odd.iter_mut().zip(next.values()).for_each(|(m, &v)| *m = m.min(v));
            } else {
                max_even.iter_mut().zip(next.values()).for_each(|(m, &v)| *m = m.max(v));
            }

            let prev = std::mem::replace(&mut cur, next);
            if converged || stalled || depth >= max_depth {
                let second = older.take().expect("depth >= 2 at exit");
                break ((prev, c_cur), second);
            }
            older = Some((prev, c_cur));
        };
        if checkpoints.last().map_or(true, |c| c.0 != depth) {
            checkpoints.push((depth, gap));
        }

        // `last` is F_{depth-1}, `second` is F_{depth-2}
        let last_is_odd = (depth - 1) % 2 == 1;
        let ((f_odd, c_odd), (f_even, c_even)) = if last_is_odd { (last, second) } else { (second, last) };
        let (depth_odd, depth_even) = if last_is_odd { (depth - 1, depth - 2) } else { (depth - 2, depth - 1) };

        // F_odd against C_e ∫_0^z F_even^Δ(1-t) μ(dt)
        let grid = self.grid();
        let ve = f_even.values();
        let g: Vec<f64> = (0..n).map(|i| ve[grid.reflect(i)].powi(delta as i32)).collect();
        let relation_residual = self
            .quad
            .cumulative(&g)
            .iter()
            .zip(f_odd.values())
            .map(|(a, fo)| (fo - c_even * a).abs())
            .fold(0.0, f64::max);

        let s = self.measure.density_scale().unwrap_or(1.0);
        let th = thetas(self.measure.lambda(), delta, c_odd * s, c_even * s);
        Ok(RecursionReport {
            delta,
            depth_reached: depth,
            ratios,
            log_z: log_z.is_finite().then_some(log_z),
            log_z_per_node,
            f_odd,
            f_even,
            depth_odd,
            depth_even,
            c_odd,
            c_even,
            theta_odd: th.map(|t| t.0),
            theta_even: th.map(|t| t.1),
            gap_sup: gap,
            checkpoints,
            relation_residual,
            converged,
            monotonicity_violations: violations,
        })
    }
}

/// Points where `a` crosses `bound` in the forbidden direction: `sign = 1`
/// forbids `a > bound`, `sign = -1` forbids `a < bound`.
fn count_violations(a: &[f64], bound: &[f64], sign: f64) -> usize {
    a.iter()
        .zip(bound)
        .filter(|(x, b)| sign * (**x - **b) > MONOTONE_TOL)
        .count()
}

fn with_depth(e: Error, depth: usize) -> Error {
    match e {
        Error::RatioUnderflow { .. } => Error::RatioUnderflow { depth },
        other => other,
    }
}

fn initial_marginal_on(measure: &SpinMeasure, grid: Arc<Grid>) -> GridDistribution {
    let total = measure.total_mass();
    let values: Vec<f64> = grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, &z)| if i + 1 == grid.len() { 1.0 } else { measure.mass(0.0, z, true, true) / total })
        .collect();
    let jumps = measure.atoms().iter().map(|a| (a.location, a.weight / total)).collect();
    let derivative = measure
        .has_density()
        .then(|| grid.points().iter().map(|&z| measure.density(z) / total).collect());
    GridDistribution::new(grid, values, jumps, derivative).expect("lengths match")
}

/// `F_0` on the default grid for `measure`.
pub fn initial_marginal(measure: &SpinMeasure, intervals: usize) -> Result<GridDistribution> {
    let grid = Arc::new(Grid::for_measure(measure, intervals)?);
    Ok(initial_marginal_on(measure, grid))
}

/// One recursion step on the grid of `prev`.
pub fn iterate_marginal(
    measure: &SpinMeasure,
    delta: usize,
    prev: &GridDistribution,
) -> Result<(GridDistribution, f64)> {
    MarginalRecursion::on_grid(measure, delta, Arc::clone(prev.grid()))?.iterate(prev)
}

pub fn run_recursion(
    measure: &SpinMeasure,
    delta: usize,
    opts: &RecursionOptions,
) -> Result<RecursionReport> {
    MarginalRecursion::new(measure, delta, opts.intervals)?.run(opts.max_depth, opts.tol)
}

/// `ln Z` of the depth-`n` tree, chained through the recursion ratios from
/// `ln Z_0 = ln μ[0,1]`.
pub fn exact_tree_log_volume(
    measure: &SpinMeasure,
    delta: usize,
    n: usize,
    intervals: usize,
) -> Result<f64> {
    let rec = MarginalRecursion::new(measure, delta, intervals)?;
    let mut log_z = measure.total_mass().ln();
    let mut f = rec.initial();
    for k in 1..=n {
        let (next, ratio) = rec.iterate(&f).map_err(|e| with_depth(e, k))?;
        log_z = ratio.ln() + delta as f64 * log_z;
        f = next;
    }
    Ok(log_z)
}

/// Count grid points at which `history = [F_0, F_1, ...]` breaks the
/// ordering `F_{2n+1} <= F_{2n-1}`, `F_{2n} >= F_{2n-2}` or
/// `F_{2a+1} >= F_{2b}`, by more than `tol`.
pub fn check_monotonicity(history: &[GridDistribution], tol: f64) -> usize {
    let over = |a: &GridDistribution, b: &GridDistribution| {
        a.values().iter().zip(b.values()).filter(|(x, y)| **x > **y + tol).count()
    };
    let mut count = 0;
    for k in 2..history.len() {
        count += if k % 2 == 1 {
            over(&history[k], &history[k - 2])
        } else {
            over(&history[k - 2], &history[k])
        };
    }
    for odd in history.iter().skip(1).step_by(2) {
        for even in history.iter().step_by(2) {
            count += over(even, odd);
        }
    }
    count
}
