//! Sequential importance sampling over the LP polytope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{asymptotic::limit_cdf, Method, VolumeEstimate};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::grid::GridDistribution;
use crate::measure::SpinMeasure;

pub const DEFAULT_BATCHES: usize = 100;
const MIN_SAMPLES: u64 = 1000;

/// Per-node proposal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposal {
    /// `μ` restricted to the feasible cap.
    Prior,
    /// `μ(dx) F(1-x)^k` on the cap, where `k` counts the node's unassigned
    /// neighbours and `F` is the tree limit for branching `D - 1`, `D` the
    /// largest degree. Pure densities only.
    Cavity,
}

impl std::str::FromStr for Proposal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prior" => Ok(Self::Prior),
            "cavity" => Ok(Self::Cavity),
            _ => Err(Error::InvalidParameter(format!("unknown proposal {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SisOptions {
    pub samples: u64,
    pub seed: u64,
    pub batches: usize,
    pub proposal: Proposal,
    /// Label stored in the result record.
    pub graph_label: String,
}

impl SisOptions {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, batches: DEFAULT_BATCHES, proposal: Proposal::Prior, graph_label: String::new() }
    }
}

/// `log Z` with the prior proposal; see [`mc_volume_sis_with`].
pub fn mc_volume_sis(g: &Graph, m: &SpinMeasure, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    mc_volume_sis_with(g, m, &SisOptions::new(samples, seed))
}

/// Visit order and, per node, its earlier neighbours and later-neighbour count.
struct Schedule {
    order: Vec<usize>,
    earlier: Vec<Vec<usize>>,
    later: Vec<usize>,
}

impl Schedule {
    fn new(g: &Graph) -> Self {
        let order = g.bfs_order();
        let mut pos = vec![0; g.n()];
        for (i, &u) in order.iter().enumerate() {
            pos[u] = i;
        }
        let earlier = order
            .iter()
            .map(|&u| g.neighbors(u).iter().copied().filter(|&v| pos[v] < pos[u]).collect())
            .collect();
        let later = order
            .iter()
            .map(|&u| g.neighbors(u).iter().filter(|&&v| pos[v] > pos[u]).count())
            .collect();
        Self { order, earlier, later }
    }
}

/// Piecewise-linear cumulative weights `Q_k(z) = ∫_0^z F(1-x)^k μ(dx)` on
/// the grid of `F`, for `k = 0..=kmax`.
struct CavityTables {
    z: Vec<f64>,
    q: Vec<Vec<f64>>,
}

impl CavityTables {
    fn new(f: &GridDistribution, m: &SpinMeasure, kmax: usize) -> Self {
        let grid = f.grid();
        let z = grid.points().to_vec();
        let refl: Vec<f64> = (0..z.len()).map(|i| f.values()[grid.reflect(i)]).collect();
        let cell_mass: Vec<f64> = z.windows(2).map(|w| m.mass(w[0], w[1], false, false)).collect();
        let q = (0..=kmax)
            .map(|k| {
                let mut acc = 0.0;
                let mut out = Vec::with_capacity(z.len());
                out.push(0.0);
                for j in 0..z.len() - 1 {
                    let g = 0.5 * (refl[j].powi(k as i32) + refl[j + 1].powi(k as i32));
                    acc += cell_mass[j] * g;
                    out.push(acc);
                }
                out
            })
            .collect();
        Self { z, q }
    }

    /// Cell containing `x`, clamped to a valid index.
    #[inline]
    fn cell(&self, x: f64) -> usize {
        self.z.partition_point(|&p| p <= x).saturating_sub(1).min(self.z.len() - 2)
    }

    #[inline]
    fn slope(&self, k: usize, j: usize) -> f64 {
        (self.q[k][j + 1] - self.q[k][j]) / (self.z[j + 1] - self.z[j])
    }

    /// `Q_k(b)` by linear interpolation.
    #[inline]
    fn upto(&self, k: usize, b: f64) -> f64 {
        let j = self.cell(b);
        self.q[k][j] + self.slope(k, j) * (b - self.z[j]).max(0.0)
    }

    /// Draw from the piecewise-constant density `slope / Q_k(b)` on `[0, b]`;
    /// returns the point and the density's slope there.
    #[inline]
    fn sample(&self, k: usize, b: f64, total: f64, u: f64) -> (f64, f64) {
        let t = u * total;
        let q = &self.q[k];
        let jb = self.cell(b);
        let j = q[..=jb].partition_point(|&v| v <= t).saturating_sub(1).min(jb);
        // skip empty cells that share the cumulative value
        let mut j = j;
        while j < jb && self.slope(k, j) <= 0.0 {
            j += 1;
        }
        let s = self.slope(k, j);
        let x = (self.z[j] + (t - q[j]) / s).clamp(self.z[j], b.min(self.z[j + 1]));
        (x, s)
    }
}

/// Sequential importance sampling in BFS order from node 0. Each node draws
/// from the proposal on its feasible cap `[0, min(1, min(1 - x_v))]` and the
/// sample weight multiplies the per-node importance ratios. `log Z` is the
/// log of the sample mean; `std_err` is the batch-means standard error of
/// the relative mean. Sample `i` uses the ChaCha stream `(seed, i)`, so
/// results do not depend on the worker count. Disconnected graphs are
/// sampled one component at a time with the same streams, and the
/// component estimates are summed.
pub fn mc_volume_sis_with(g: &Graph, m: &SpinMeasure, opts: &SisOptions) -> Result<VolumeEstimate> {
    if opts.samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            opts.samples
        )));
    }
    if opts.batches == 0 || opts.samples < opts.batches as u64 {
        return Err(Error::InvalidParameter("batch count must be in 1..=samples".into()));
    }
    let tables = match opts.proposal {
        Proposal::Prior => None,
        Proposal::Cavity => {
            if m.has_atoms() {
                return Err(Error::AtomsNotSupported("the cavity proposal"));
            }
            let dmax = (0..g.n()).map(|u| g.degree(u)).max().unwrap_or(0);
            let f = limit_cdf(dmax.saturating_sub(1), m)?;
            Some(CavityTables::new(&f, m, dmax))
        }
    };
    let mut log_z = 0.0;
    let mut std_err = 0.0;
    for comp in g.components() {
        let sub = g.induced(&comp);
        let (lz, se) = component_estimate(&sub, m, opts, tables.as_ref())?;
        log_z += lz;
        std_err += se;
    }
    Ok(VolumeEstimate {
        graph: opts.graph_label.clone(),
        n_nodes: g.n(),
        lambda: m.lambda(),
        measure: m.kind().to_string(),
        method: Method::Sis,
        log_z,
        std_err,
        samples: opts.samples,
        seed: Some(opts.seed),
        richardson: None,
    })
}

fn component_estimate(
    g: &Graph,
    m: &SpinMeasure,
    opts: &SisOptions,
    tables: Option<&CavityTables>,
) -> Result<(f64, f64)> {
    let sched = Schedule::new(g);
    let log_weights: Vec<f64> = (0..opts.samples)
        .into_par_iter()
        .map_init(
            || vec![0.0; g.n()],
            |x, i| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(i);
                draw(&sched, m, tables, x, &mut rng)
            },
        )
        .collect();
    if log_weights.iter().all(|w| *w == f64::NEG_INFINITY) {
        return Err(Error::ZeroWeight(m.kind().to_string()));
    }
    Ok(batch_means(&log_weights, opts.batches))
}

fn draw(
    sched: &Schedule,
    m: &SpinMeasure,
    tables: Option<&CavityTables>,
    x: &mut [f64],
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut lw = 0.0;
    for (i, &u) in sched.order.iter().enumerate() {
        let cap = sched.earlier[i].iter().fold(1.0f64, |b, &v| b.min(1.0 - x[v])).max(0.0);
        let r: f64 = rng.gen();
        match tables {
            None => {
                let w = m.mass(0.0, cap, true, true);
                if w <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                lw += w.ln();
                x[u] = m.sample_below(cap, r);
            }
            Some(t) => {
                let k = sched.later[i];
                let total = t.upto(k, cap);
                if total <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let (xu, slope) = t.sample(k, cap, total, r);
                let dens = m.density(xu);
                if dens <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                lw += (dens * total / slope).ln();
                x[u] = xu;
            }
        }
    }
    lw
}

/// `(log mean exp(w), se)` where `se` is the standard error of the batch
/// means of `exp(w)` relative to the overall mean.
fn batch_means(log_w: &[f64], batches: usize) -> (f64, f64) {
    let shift = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = log_w.len();
    let scaled: Vec<f64> = log_w.iter().map(|w| (w - shift).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / n as f64;
    let size = n / batches;
    let rel: Vec<f64> = (0..batches)
        .map(|b| {
            let end = if b + 1 == batches { n } else { (b + 1) * size };
            let chunk = &scaled[b * size..end];
            chunk.iter().sum::<f64>() / chunk.len() as f64 / mean
        })
        .collect();
    let se = if batches > 1 {
        let avg = rel.iter().sum::<f64>() / batches as f64;
        let var = rel.iter().map(|r| (r - avg).powi(2)).sum::<f64>() / (batches - 1) as f64;
        (var / batches as f64).sqrt()
    } else {
        0.0
    };
    (shift + mean.ln(), se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, path};

    #[test]
    fn edge_volume() {
        let m = SpinMeasure::continuous(1.0).unwrap();
        let est = mc_volume_sis(&path(2).unwrap(), &m, 20_000, 3).unwrap();
        assert!((est.log_z - 0.5f64.ln()).abs() <= 3.0 * est.std_err + 1e-12);
        assert!(est.std_err < 0.01);
    }

    #[test]
    fn deterministic_for_seed() {
        let m = SpinMeasure::continuous(2.0).unwrap();
        let g = complete(3).unwrap();
        let a = mc_volume_sis(&g, &m, 5000, 11).unwrap();
        let b = mc_volume_sis(&g, &m, 5000, 11).unwrap();
        assert_eq!(a.log_z.to_bits(), b.log_z.to_bits());
        let c = mc_volume_sis(&g, &m, 5000, 12).unwrap();
        assert_ne!(a.log_z, c.log_z);
    }

    #[test]
    fn rejects_few_samples() {
        let m = SpinMeasure::continuous(1.0).unwrap();
        assert!(mc_volume_sis(&path(2).unwrap(), &m, 10, 0).is_err());
    }

    #[test]
    fn cavity_needs_density() {
        let m = SpinMeasure::two_state(1.0).unwrap();
        let mut o = SisOptions::new(1000, 0);
        o.proposal = Proposal::Cavity;
        assert!(matches!(mc_volume_sis_with(&path(3).unwrap(), &m, &o), Err(Error::AtomsNotSupported(_))));
    }

    #[test]
    fn batch_means_constant() {
        let (lz, se) = batch_means(&vec![-2.0; 1000], 100);
        assert!((lz + 2.0).abs() < 1e-14);
        assert!(se < 1e-14);
    }
}
