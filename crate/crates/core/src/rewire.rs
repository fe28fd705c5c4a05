//! Removing two distant nodes of a regular graph and re-joining their
//! neighbourhoods, and chains of such steps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, RegularGraph};

/// How the neighbours of `u1` are matched to those of `u2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// i-th smallest neighbour of `u1` to the i-th smallest of `u2`.
    Sorted,
    /// i-th smallest of `u1` to the i-th largest of `u2`.
    Reversed,
    /// First permutation of `u2`'s sorted neighbours, in lexicographic
    /// order, under which a connected input stays connected; falls back to
    /// `Sorted`.
    KeepConnected,
    /// `perm[i]` is the index into `u2`'s sorted neighbours matched with the
    /// i-th neighbour of `u1`.
    Explicit(Vec<usize>),
}

/// Rewire with the default [`Pairing::KeepConnected`].
pub fn rewire(g: &RegularGraph, u1: usize, u2: usize) -> Result<RegularGraph> {
    rewire_with_pairing(g, u1, u2, &Pairing::KeepConnected)
}

pub fn rewire_with_pairing(g: &RegularGraph, u1: usize, u2: usize, pairing: &Pairing) -> Result<RegularGraph> {
    let n = g.n();
    if u1 >= n || u2 >= n {
        return Err(Error::Graph(format!("nodes ({u1}, {u2}) out of range for {n} nodes")));
    }
    let distance = g.distance(u1, u2).unwrap_or(usize::MAX);
    if distance < 4 {
        return Err(Error::RewireDistance { u1, u2, distance });
    }
    let a = g.neighbors(u1).to_vec();
    let b = g.neighbors(u2).to_vec();
    let delta = a.len();
    let build = |perm: &[usize]| -> Result<RegularGraph> {
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for (v, l) in label.iter_mut().enumerate() {
            if v != u1 && v != u2 {
                *l = next;
                next += 1;
            }
        }
        let mut edges: Vec<(usize, usize)> = g
            .edges()
            .into_iter()
            .filter(|&(x, y)| ![x, y].contains(&u1) && ![x, y].contains(&u2))
            .map(|(x, y)| (label[x], label[y]))
            .collect();
        edges.extend((0..delta).map(|i| (label[a[i]], label[b[perm[i]]])));
        RegularGraph::new(Graph::new(n - 2, &edges)?)
    };
    let sorted: Vec<usize> = (0..delta).collect();
    match pairing {
        Pairing::Sorted => build(&sorted),
        Pairing::Reversed => build(&sorted.iter().rev().copied().collect::<Vec<_>>()),
        Pairing::Explicit(perm) => {
            let mut check = perm.clone();
            check.sort_unstable();
            if check != sorted {
                return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation of 0..{delta}")));
            }
            build(perm)
        }
        Pairing::KeepConnected => {
            if !g.is_connected() {
                return build(&sorted);
            }
            let mut perm = sorted.clone();
            loop {
                let h = build(&perm)?;
                if h.is_connected() {
                    return Ok(h);
                }
                if !next_permutation(&mut perm) {
                    return build(&sorted);
                }
            }
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `N/2 - (2g+1) Δ^(2g)`: guaranteed number of rewiring steps.
pub fn lemma_budget(n: usize, delta: usize, g: usize) -> i128 {
    n as i128 / 2 - (2 * g as i128 + 1) * (delta as i128).pow(2 * g as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChainMode {
    /// Only the steps covered by the girth lemma: pair distance at least
    /// `2g+1`, within the step budget, on inputs meeting its size bound.
    Lemma,
    /// Keep rewiring while the farthest pair is at distance at least 4;
    /// girth is asserted only on steps with distance at least `2g+1`.
    Exhaustive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainStep {
    pub step: usize,
    pub n: usize,
    pub girth: Option<usize>,
    pub u1: usize,
    pub u2: usize,
    pub pair_distance: usize,
}

#[derive(Clone, Debug)]
pub struct ChainResult {
    /// Input followed by every rewired graph.
    pub snapshots: Vec<RegularGraph>,
    pub log: Vec<ChainStep>,
    pub stop_reason: String,
}

/// Repeatedly rewires the farthest pair (see [`ChainMode`]), checking
/// regularity and girth after every step.
pub fn rewire_chain(g: &RegularGraph, min_girth: usize, mode: ChainMode) -> Result<ChainResult> {
    if min_girth < 4 {
        return Err(Error::InvalidParameter(format!("chain needs g >= 4, got {min_girth}")));
    }
    let girth0 = g.girth();
    if girth0.map_or(false, |x| x < min_girth) {
        return Err(Error::InvalidParameter(format!(
            "input girth {} is below g = {min_girth}",
            girth0.unwrap_or(0)
        )));
    }
    let delta = g.delta();
    let budget = lemma_budget(g.n(), delta, min_girth);
    if mode == ChainMode::Lemma && budget <= 0 {
        return Err(Error::InvalidParameter(format!(
            "need 2(2g+1)Δ^(2g) < N; N = {}, Δ = {delta}, g = {min_girth}",
            g.n()
        )));
    }
    let far = 2 * min_girth + 1;
    let mut snapshots = vec![g.clone()];
    let mut log = Vec::new();
    let stop_reason = loop {
        let cur = snapshots.last().expect("non-empty");
        if mode == ChainMode::Lemma && log.len() as i128 >= budget {
            break format!("step budget {budget} exhausted");
        }
        let fp = cur.farthest_pair();
        let needed = if mode == ChainMode::Lemma { far } else { 4 };
        if fp.distance < needed {
            break format!("farthest pair distance {} < {needed}", fp.distance);
        }
        let next = rewire(cur, fp.u, fp.v)?;
        let step = log.len() + 1;
        let fail = |reason: String| Error::ChainInvariant { step, reason, snapshot: next.to_edge_list() };
        if next.regular_degree() != Some(delta) {
            return Err(fail(format!("lost {delta}-regularity")));
        }
        let girth = next.girth();
        if fp.distance >= far && girth.map_or(false, |x| x < min_girth) {
            return Err(fail(format!("girth {} < {min_girth}", girth.unwrap_or(0))));
        }
        log.push(ChainStep { step, n: next.n(), girth, u1: fp.u, u2: fp.v, pair_distance: fp.distance });
        snapshots.push(next);
    };
    Ok(ChainResult { snapshots, log, stop_reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, petersen};

    #[test]
    fn c8_antipodal_gives_c6() {
        let h = rewire(&cycle(8).unwrap(), 0, 4).unwrap();
        assert_eq!(h.cycle_canonical_form(), Some(vec![6]));
        let split = rewire_with_pairing(&cycle(8).unwrap(), 0, 4, &Pairing::Sorted).unwrap();
        assert_eq!(split.cycle_canonical_form(), Some(vec![3, 3]));
        let rev = rewire_with_pairing(&cycle(8).unwrap(), 0, 4, &Pairing::Reversed).unwrap();
        assert_eq!(rev.cycle_canonical_form(), Some(vec![6]));
    }

    #[test]
    fn distance_guard() {
        match rewire(&cycle(7).unwrap(), 0, 3) {
            Err(Error::RewireDistance { distance, .. }) => assert_eq!(distance, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(rewire(&petersen(), 0, 7).is_err());
    }

    #[test]
    fn counts() {
        let g = cycle(20).unwrap();
        let h = rewire(&g, 2, 12).unwrap();
        assert_eq!(h.n(), g.n() - 2);
        assert_eq!(h.edge_count(), g.edge_count() - 2);
    }

    #[test]
    fn budget_arithmetic() {
        assert_eq!(lemma_budget(1_000_000, 3, 4), 440_951);
        assert!(lemma_budget(100, 2, 4) <= 0);
    }

    #[test]
    fn chain_guards() {
        let c = cycle(100).unwrap();
        assert!(rewire_chain(&c, 3, ChainMode::Exhaustive).is_err());
        assert!(rewire_chain(&c, 4, ChainMode::Lemma).is_err());
        assert!(rewire_chain(&petersen(), 6, ChainMode::Exhaustive).is_err());
    }

    #[test]
    fn permutations() {
        let mut p = vec![0, 1, 2];
        let mut all = vec![p.clone()];
        while next_permutation(&mut p) {
            all.push(p.clone());
        }
        assert_eq!(all.len(), 6);
        assert_eq!(all[1], vec![0, 2, 1]);
    }
}
