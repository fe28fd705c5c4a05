//! Shooting on the first-order ODE `Ḟ = C (1 - F^(Δ+1))^(Δ/(Δ+1))`,
//! `F(0) = 0`, for the constant `C*` whose hitting time of `1` is exactly 1.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{fmt17, Grid, GridDistribution};

pub const DEFAULT_STEP: f64 = 1e-4;
pub const DEFAULT_DELTA_CUT: f64 = 1e-6;
pub const DEFAULT_GRID: usize = 4096;
const MAX_BISECTIONS: usize = 200;
const MAX_EXPANSIONS: usize = 64;

/// `b(C, y) = C (1 - y^(Δ+1))^(Δ/(Δ+1))`, with `y` clamped to `[0, 1]`.
#[inline]
pub fn drift(c: f64, y: f64, delta: usize) -> f64 {
    let y = y.clamp(0.0, 1.0);
    let d = delta as f64;
    c * (1.0 - y.powi(delta as i32 + 1)).max(0.0).powf(d / (d + 1.0))
}

/// `∂b/∂y`; finite for `y < 1`.
#[inline]
fn drift_dy(c: f64, y: f64, delta: usize) -> f64 {
    if delta == 0 {
        return 0.0;
    }
    let y = y.clamp(0.0, 1.0);
    let d = delta as f64;
    let rest = (1.0 - y.powi(delta as i32 + 1)).max(f64::MIN_POSITIVE);
    -c * d * y.powi(delta as i32) * rest.powf(-1.0 / (d + 1.0))
}

fn rk4<const N: usize>(y: [f64; N], h: f64, f: impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let add = |a: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(&y);
    let k2 = f(&add(&y, &k1, 0.5 * h));
    let k3 = f(&add(&y, &k2, 0.5 * h));
    let k4 = f(&add(&y, &k3, h));
    let mut out = y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Cubic Hermite value on `[0, h]` at `t`.
fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, t: f64) -> f64 {
    let s = t / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
}

/// Fixed-step solution of the ODE from `F(0) = 0` up to the crossing of
/// `1 - delta_cut`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub c: f64,
    pub delta: usize,
    pub step: f64,
    pub delta_cut: f64,
    /// `F(k * step)` for every step up to and including the crossing step.
    pub values: Vec<f64>,
    /// `σ_C(delta_cut)`.
    pub sigma: f64,
}

impl Trajectory {
    /// Hitting time of `1`: `σ` plus the leading tail term.
    pub fn tau(&self) -> f64 {
        self.sigma + tail_time(self.c, self.delta, self.delta_cut)
    }

    /// `(F(z), Ḟ(z))`, using the leading-order tail profile past `σ`.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        if z <= 0.0 {
            return (0.0, drift(self.c, 0.0, self.delta));
        }
        if z < self.sigma {
            let k = ((z / self.step) as usize).min(self.values.len() - 2);
            let (y0, y1) = (self.values[k], self.values[k + 1]);
            let (d0, d1) = (drift(self.c, y0, self.delta), drift(self.c, y1, self.delta));
            let f = hermite(y0, y1, d0, d1, self.step, z - k as f64 * self.step);
            return (f, drift(self.c, f, self.delta));
        }
        let r = self.tau() - z;
        if r <= 0.0 {
            return (1.0, 0.0);
        }
        let d = self.delta as f64;
        let cr = self.c * r;
        let gap = cr.powf(d + 1.0) / (d + 1.0);
        (1.0 - gap, self.c * cr.powf(d))
    }

    /// Samples of `F` and `Ḟ` on `grid`.
    pub fn to_distribution(&self, grid: Arc<Grid>) -> GridDistribution {
        let (values, derivative): (Vec<f64>, Vec<f64>) =
            grid.points().iter().map(|&z| self.eval(z)).unzip();
        GridDistribution::new(grid, values, Vec::new(), Some(derivative))
            .expect("samples match grid length")
    }
}

/// Time the tail needs to climb from `1 - delta_cut` to `1`, to leading
/// order: `((Δ+1) δ)^(1/(Δ+1)) / C`.
pub fn tail_time(c: f64, delta: usize, delta_cut: f64) -> f64 {
    let p = delta as f64 + 1.0;
    (p * delta_cut).powf(1.0 / p) / c
}

/// RK4 from `F(0) = 0` until `F >= 1 - delta_cut`; the crossing time is
/// located by inverting the Hermite interpolant on the last step.
pub fn integrate_to_threshold(c: f64, delta: usize, delta_cut: f64, step: f64) -> Result<Trajectory> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    if !(delta_cut > 0.0 && delta_cut < 0.5) || !(step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need delta_cut in (0, 0.5) and step > 0, got {delta_cut}, {step}"
        )));
    }
    let level = 1.0 - delta_cut;
    let limit = 10.0 / c + 10.0;
    let max_steps = (limit / step).ceil() as usize;
    let mut values = Vec::with_capacity(((1.5 / c) / step) as usize + 2);
    let mut y = 0.0;
    let mut sigma = None;
    values.push(y);
    for k in 0..max_steps {
        // refine where the drift stiffens near F = 1
        let subs = substeps(c, y, delta, step);
        let h = step / subs as f64;
        for j in 0..subs {
            let next = rk4([y], h, |s| [drift(c, s[0], delta)])[0].min(1.0);
            if sigma.is_none() && next >= level {
                let (d0, d1) = (drift(c, y, delta), drift(c, next, delta));
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if hermite(y, next, d0, d1, h, mid) < level {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                sigma = Some(k as f64 * step + j as f64 * h + 0.5 * (lo + hi));
            }
            y = next;
        }
        values.push(y);
        if let Some(sigma) = sigma {
            return Ok(Trajectory { c, delta, step, delta_cut, values, sigma });
        }
    }
    Err(Error::ThresholdNotReached { level, limit })
}

const STIFF_LIMIT: f64 = 0.02;

fn substeps(c: f64, y: f64, delta: usize, step: f64) -> usize {
    let stiff = step * drift_dy(c, y, delta).abs();
    ((stiff / STIFF_LIMIT).ceil() as usize).clamp(1, 4096)
}

/// `τ_C` with default step.
pub fn tau(c: f64, delta: usize, delta_cut: f64) -> Result<f64> {
    Ok(integrate_to_threshold(c, delta, delta_cut, DEFAULT_STEP)?.tau())
}

#[derive(Clone, Copy, Debug)]
pub struct ShootingOptions {
    pub step: f64,
    pub delta_cut: f64,
    pub intervals: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { step: DEFAULT_STEP, delta_cut: DEFAULT_DELTA_CUT, intervals: DEFAULT_GRID }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShootingResult {
    pub delta: usize,
    pub c_star: f64,
    pub tau: f64,
    #[serde(skip)]
    pub f: GridDistribution,
    /// `(C, τ_C)` for every bisection probe, in order.
    pub tau_trace: Vec<(f64, f64)>,
    pub delta_cut: f64,
    pub bisection_iters: usize,
    /// `|τ(δ) - τ(δ/10)|` at `C*`.
    pub delta_cut_sensitivity: f64,
}

impl ShootingResult {
    /// CSV with header `z,F,Fdot`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,F,Fdot\n");
        let d = self.f.derivative().expect("shooting profiles carry derivatives");
        for (i, z) in self.f.grid().points().iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", fmt17(*z), fmt17(self.f.values()[i]), fmt17(d[i]));
        }
        out
    }
}

/// Bisection on `C` until `|τ_C - 1| <= tol`.
pub fn find_cstar(delta: usize, tol: f64) -> Result<ShootingResult> {
    find_cstar_with(delta, tol, &ShootingOptions::default())
}

pub fn find_cstar_with(delta: usize, tol: f64, opts: &ShootingOptions) -> Result<ShootingResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let tau_of = |c: f64| -> Result<f64> {
        Ok(integrate_to_threshold(c, delta, opts.delta_cut, opts.step)?.tau())
    };
    let (mut lo, mut hi) = (1e-2, 1e2);
    let mut expansions = 0;
    while tau_of(lo)? < 1.0 {
        lo *= 0.5;
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(Error::Bracket(format!("tau({lo}) < 1")));
        }
    }
    while tau_of(hi)? > 1.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(Error::Bracket(format!("tau({hi}) > 1")));
        }
    }

    let mut trace = Vec::new();
    let mut best = None;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let traj = integrate_to_threshold(mid, delta, opts.delta_cut, opts.step)?;
        let t = traj.tau();
        trace.push((mid, t));
        let done = (t - 1.0).abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * mid;
        if t > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        best = Some(traj);
        if done {
            break;
        }
    }
    let traj = best.expect("at least one bisection step");
    let grid = Arc::new(Grid::uniform(opts.intervals)?);
    let refined = integrate_to_threshold(traj.c, delta, opts.delta_cut / 10.0, opts.step)?.tau();
    Ok(ShootingResult {
        delta,
        c_star: traj.c,
        tau: traj.tau(),
        f: traj.to_distribution(grid),
        bisection_iters: trace.len(),
        tau_trace: trace,
        delta_cut: opts.delta_cut,
        delta_cut_sensitivity: (refined - traj.tau()).abs(),
    })
}

/// `F_C` on the step lattice `z_k = k * step`, `k = 0..=steps`.
pub fn integrate_profile(c: f64, delta: usize, step: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = 0.0;
    out.push(y);
    for _ in 0..steps {
        y = rk4([y], step, |s| [drift(c, s[0], delta)])[0].min(1.0);
        out.push(y);
    }
    out
}

/// `R_C = ∂F_C/∂C` on the step lattice.
#[derive(Clone, Debug, Serialize)]
pub struct Sensitivity {
    pub step: f64,
    pub z: Vec<f64>,
    pub f: Vec<f64>,
    pub r: Vec<f64>,
}

/// Evaluates `R_C(z) = ∫_0^z exp(∫_x^z ∂b/∂y dt) ∂b/∂C dx` along the
/// trajectory, for `z` up to the first time `F` reaches `level`.
pub fn sensitivity(c: f64, delta: usize, level: f64, step: f64) -> Result<Sensitivity> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("level must lie in (0, 1), got {level}")));
    }
    let limit = 10.0 / c + 10.0;
    let max_steps = (limit / step).ceil() as usize;
    // state: F, E = ∫ ∂b/∂y, I = ∫ e^{-E} ∂b/∂C
    let rhs = |s: &[f64; 3]| {
        let b = drift(c, s[0], delta);
        [b, drift_dy(c, s[0], delta), (-s[1]).exp() * b / c]
    };
    let mut state = [0.0; 3];
    let mut out = Sensitivity { step, z: vec![0.0], f: vec![0.0], r: vec![0.0] };
    for k in 1..=max_steps {
        let next = rk4(state, step, rhs);
        if next[0] > level {
            return Ok(out);
        }
        state = next;
        out.z.push(k as f64 * step);
        out.f.push(state[0]);
        out.r.push(state[1].exp() * state[2]);
    }
    Err(Error::ThresholdNotReached { level, limit })
}

/// Diagnostics for the second-order ODE and its boundary conditions.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    /// Sup of the pointwise residual over the window.
    pub sup: f64,
    pub argmax: f64,
    pub window: (f64, f64),
    pub spacing: f64,
    pub f_at_0: f64,
    /// First grid point with `F >= 1 - 1e-12`.
    pub hit_one: Option<f64>,
    pub fdot_at_0: f64,
    pub fdot_at_1: f64,
    /// `|F(0)|`, `|hit - 1|`, `|Ḟ(0+) - C|`, `|Ḟ(1)|`.
    pub bc_errors: [f64; 4],
}

/// Sup over `window` of
/// `|F̈ - ln λ Ḟ + C^(1+1/Δ) Δ λ^(1-z) λ^(z/Δ) Ḟ^(1-1/Δ) F^Δ|`
/// from three-point differences on a sub-grid with spacing at least `2^-10`.
/// Stored derivative values are used for `Ḟ` where present.
pub fn second_order_residual(
    f: &GridDistribution,
    c: f64,
    lambda: f64,
    delta: usize,
    window: (f64, f64),
) -> Result<ResidualReport> {
    if delta == 0 || !(lambda > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter("need delta >= 1, lambda > 0, C > 0".into()));
    }
    let min_spacing = 1.0 / 1024.0;
    let z = f.grid().points();
    let v = f.values();
    let deriv = f.derivative();
    let mut picks = vec![0];
    for i in 1..z.len() {
        if z[i] - z[*picks.last().unwrap()] >= min_spacing - 1e-15 {
            picks.push(i);
        }
    }
    let d = delta as f64;
    let ln_l = lambda.ln();
    let mut sup: f64 = 0.0;
    let mut argmax = f64::NAN;
    for w in picks.windows(3) {
        let (a, b, e) = (w[0], w[1], w[2]);
        if z[b] < window.0 || z[b] > window.1 {
            continue;
        }
        let (h1, h2) = (z[b] - z[a], z[e] - z[b]);
        let fdd = 2.0 * (h1 * v[e] - (h1 + h2) * v[b] + h2 * v[a]) / (h1 * h2 * (h1 + h2));
        let fd = match deriv {
            Some(dv) => dv[b],
            None => {
                -h2 / (h1 * (h1 + h2)) * v[a] + (h2 - h1) / (h1 * h2) * v[b]
                    + h1 / (h2 * (h1 + h2)) * v[e]
            }
        };
        let zb = z[b];
        let res = fdd - ln_l * fd
            + c.powf(1.0 + 1.0 / d)
                * d
                * lambda.powf(1.0 - zb + zb / d)
                * fd.max(0.0).powf(1.0 - 1.0 / d)
                * v[b].powi(delta as i32);
        if res.abs() > sup {
            sup = res.abs();
            argmax = zb;
        }
    }
    let n = z.len() - 1;
    let fdot_at_0 = match deriv {
        Some(dv) => dv[0],
        None => (v[1] - v[0]) / (z[1] - z[0]),
    };
    let fdot_at_1 = match deriv {
        Some(dv) => dv[n],
        None => (v[n] - v[n - 1]) / (z[n] - z[n - 1]),
    };
    let hit_one = z.iter().zip(v).find(|(_, &fv)| fv >= 1.0 - 1e-12).map(|(&zz, _)| zz);
    let bc_errors = [
        v[0].abs(),
        hit_one.map_or(f64::INFINITY, |h| (h - 1.0).abs()),
        (fdot_at_0 - c).abs(),
        fdot_at_1.abs(),
    ];
    Ok(ResidualReport {
        sup,
        argmax,
        window,
        spacing: min_spacing,
        f_at_0: v[0],
        hit_one,
        fdot_at_0,
        fdot_at_1,
        bc_errors,
    })
}
