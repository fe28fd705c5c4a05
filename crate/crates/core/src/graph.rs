//! Simple undirected graphs, regular graphs, distances, girth, generators
//! and the edge-list format.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::ops::Deref;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const PAIRING_RETRIES: usize = 10_000;
const UNREACHED: usize = usize::MAX;

/// Simple undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting loops, repeated edges and out-of-range ends.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Graph(format!("edge ({u}, {v}) out of range for {n} nodes")));
            }
            if u == v {
                return Err(Error::Graph(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Graph(format!("repeated edge at node {u}")));
            }
        }
        Ok(Self { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, list) in self.adj.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// Common degree, if every node has the same one.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adj.first().map_or(0, Vec::len);
        self.adj.iter().all(|l| l.len() == d).then_some(d)
    }

    /// BFS distances from `src`; `usize::MAX` marks unreachable nodes.
    pub fn bfs(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHED; self.n()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == UNREACHED {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// BFS order from node 0, continuing with the smallest unvisited node in
    /// each further component.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n()];
        let mut order = Vec::with_capacity(self.n());
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut head = order.len();
            order.push(start);
            while head < order.len() {
                let u = order[head];
                head += 1;
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        order.push(v);
                    }
                }
            }
        }
        order
    }

    pub fn distance(&self, u: usize, v: usize) -> Option<usize> {
        let d = self.bfs(u)[v];
        (d != UNREACHED).then_some(d)
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![UNREACHED; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if label[s] != UNREACHED {
                continue;
            }
            let mut comp = vec![s];
            label[s] = out.len();
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in &self.adj[u] {
                    if label[v] == UNREACHED {
                        label[v] = out.len();
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.bfs(0).iter().all(|&d| d != UNREACHED)
    }

    /// Subgraph induced on `nodes` (relabelled in the given order).
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![UNREACHED; self.n()];
        for (i, &u) in nodes.iter().enumerate() {
            index[u] = i;
        }
        let adj = nodes
            .iter()
            .map(|&u| {
                let mut l: Vec<usize> =
                    self.adj[u].iter().filter(|&&v| index[v] != UNREACHED).map(|&v| index[v]).collect();
                l.sort_unstable();
                l
            })
            .collect();
        Graph { adj }
    }

    /// Length of the shortest cycle through a BFS from `root`, if any.
    fn shortest_cycle_from(&self, root: usize, limit: usize) -> Option<usize> {
        let n = self.n();
        let mut dist = vec![UNREACHED; n];
        let mut parent = vec![UNREACHED; n];
        let mut queue = VecDeque::new();
        dist[root] = 0;
        queue.push_back(root);
        let mut best = UNREACHED;
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best.min(limit) {
                break;
            }
            for &v in &self.adj[u] {
                if dist[v] == UNREACHED {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else if parent[u] != v {
                    best = best.min(dist[u] + dist[v] + 1);
                }
            }
        }
        (best != UNREACHED && best < limit).then_some(best)
    }

    /// Length of the shortest cycle; `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        self.shortest_cycle_below(UNREACHED)
    }

    /// Length of the shortest cycle if it is shorter than `limit`.
    pub fn shortest_cycle_below(&self, limit: usize) -> Option<usize> {
        (0..self.n())
            .into_par_iter()
            .filter_map(|r| self.shortest_cycle_from(r, limit))
            .min()
    }

    /// A diameter-realizing pair, lexicographically smallest among ties.
    /// For disconnected graphs the search is confined to the largest
    /// component and `disconnected` is set.
    pub fn farthest_pair(&self) -> FarthestPair {
        let comps = self.components();
        let disconnected = comps.len() > 1;
        let comp = comps
            .iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
            .cloned()
            .unwrap_or_default();
        let rows: Vec<(usize, usize, usize)> = comp
            .par_iter()
            .map(|&u| {
                let dist = self.bfs(u);
                let mut best = (u, u, 0);
                for &v in &comp {
                    if v > u && dist[v] > best.2 {
                        best = (u, v, dist[v]);
                    }
                }
                best
            })
            .collect();
        let mut best = rows.first().copied().unwrap_or((0, 0, 0));
        for r in rows {
            if r.2 > best.2 {
                best = r;
            }
        }
        FarthestPair { u: best.0, v: best.1, distance: best.2, disconnected }
    }

    /// Edge-list text: `N M` header and sorted `u v` lines.
    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut out = format!("{} {}\n", self.n(), edges.len());
        for (u, v) in edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the edge-list format; `#` lines are comments.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut header = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let nums = t
                .split_whitespace()
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line, reason: e.to_string() })?;
            if nums.len() != 2 {
                return Err(Error::Parse { line, reason: format!("expected two integers, got {}", nums.len()) });
            }
            match header {
                None => header = Some((nums[0], nums[1])),
                Some((n, _)) => {
                    let (u, v) = (nums[0], nums[1]);
                    if !(u < v && v < n) {
                        return Err(Error::Parse { line, reason: format!("need 0 <= u < v < {n}, got {u} {v}") });
                    }
                    edges.push((u, v));
                }
            }
        }
        let (n, m) = header.ok_or(Error::Parse { line: 0, reason: "missing `N M` header".into() })?;
        if edges.len() != m {
            return Err(Error::Parse {
                line: 0,
                reason: format!("header promises {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, &edges)
    }

    /// Disjoint union, `other` relabelled after `self`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n();
        let mut adj = self.adj.clone();
        adj.extend(other.adj.iter().map(|l| l.iter().map(|v| v + off).collect()));
        Graph { adj }
    }

    /// Sorted cycle lengths if every component is a cycle.
    pub fn cycle_canonical_form(&self) -> Option<Vec<usize>> {
        if self.regular_degree() != Some(2) {
            return None;
        }
        let mut lens: Vec<usize> = self.components().iter().map(Vec::len).collect();
        lens.sort_unstable();
        Some(lens)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FarthestPair {
    pub u: usize,
    pub v: usize,
    pub distance: usize,
    pub disconnected: bool,
}

/// A simple graph in which every node has degree `delta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularGraph {
    graph: Graph,
    delta: usize,
}

impl RegularGraph {
    pub fn new(graph: Graph) -> Result<Self> {
        let delta = graph
            .regular_degree()
            .ok_or_else(|| Error::Graph("graph is not regular".into()))?;
        Ok(Self { graph, delta })
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }
}

impl Deref for RegularGraph {
    type Target = Graph;

    fn deref(&self) -> &Graph {
        &self.graph
    }
}

pub fn cycle(n: usize) -> Result<RegularGraph> {
    if n < 3 {
        return Err(Error::Graph(format!("a cycle needs at least 3 nodes, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    RegularGraph::new(Graph::new(n, &edges)?)
}

pub fn path(n: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &edges)
}

pub fn complete(n: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::new(n, &edges)
}

/// `n/2` disjoint edges.
pub fn perfect_matching(n: usize) -> Result<RegularGraph> {
    if n % 2 != 0 {
        return Err(Error::Graph(format!("a perfect matching needs an even node count, got {n}")));
    }
    let edges: Vec<_> = (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect();
    RegularGraph::new(Graph::new(n, &edges)?)
}

/// Rooted tree in which the root and every internal node have `branch`
/// children, of the given depth.
pub fn regular_tree(branch: usize, depth: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut level = vec![0usize];
    let mut next_id = 1;
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * branch);
        for &p in &level {
            for _ in 0..branch {
                edges.push((p, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        level = next;
    }
    Graph::new(next_id, &edges)
}

pub fn petersen() -> RegularGraph {
    let edges = [
        (0, 1), (1, 2), (2, 3), (3, 4), (0, 4),
        (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
        (5, 7), (7, 9), (6, 9), (6, 8), (5, 8),
    ];
    RegularGraph::new(Graph::new(10, &edges).expect("valid constant")).expect("3-regular")
}

pub fn heawood() -> RegularGraph {
    let mut edges: Vec<(usize, usize)> = (0..14).map(|i| (i, (i + 1) % 14)).collect();
    for i in (0..14).step_by(2) {
        edges.push((i, (i + 5) % 14));
    }
    RegularGraph::new(Graph::new(14, &edges).expect("valid constant")).expect("3-regular")
}

pub fn named(name: &str) -> Result<RegularGraph> {
    match name {
        "petersen" => Ok(petersen()),
        "heawood" => Ok(heawood()),
        _ => Err(Error::Graph(format!("unknown named graph {name:?}"))),
    }
}

/// Pairing-model random `delta`-regular graph; loops and repeated edges
/// cause a full retry.
pub fn random_regular(n: usize, delta: usize, seed: u64) -> Result<RegularGraph> {
    if (n * delta) % 2 != 0 || delta >= n {
        return Err(Error::Graph(format!("no simple {delta}-regular graph on {n} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n * delta).map(|p| p / delta).collect();
    'retry: for _ in 0..PAIRING_RETRIES {
        points.shuffle(&mut rng);
        let mut adj = vec![Vec::with_capacity(delta); n];
        for pair in points.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adj[u].contains(&v) {
                continue 'retry;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        return RegularGraph::new(Graph { adj });
    }
    Err(Error::PairingRetries(PAIRING_RETRIES))
}

/// Whether edge `(a, b)` lies on a cycle shorter than `limit`, i.e. `b` is
/// within `limit - 2` of `a` once the edge is removed.
fn edge_on_short_cycle(adj: &[Vec<usize>], a: usize, b: usize, limit: usize) -> bool {
    if limit < 3 {
        return false;
    }
    let depth = limit - 2;
    let mut frontier = vec![a];
    let mut seen = vec![a];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in &adj[u] {
                if u == a && v == b {
                    continue;
                }
                if v == b {
                    return true;
                }
                if !seen.contains(&v) {
                    seen.push(v);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    false
}

/// Random `delta`-regular graph with girth at least `min_girth`: a
/// pairing-model draw whose short cycles are broken by degree-preserving
/// double-edge switches.
pub fn random_regular_with_girth(n: usize, delta: usize, min_girth: usize, seed: u64) -> Result<RegularGraph> {
    let base = random_regular(n, delta, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut adj = base.graph.adj;
    let max_switches = 100 * n + 10_000;
    for _ in 0..max_switches {
        let mut bad = None;
        'scan: for a in 0..n {
            for &b in &adj[a] {
                if a < b && edge_on_short_cycle(&adj, a, b, min_girth) {
                    bad = Some((a, b));
                    break 'scan;
                }
            }
        }
        let Some((a, b)) = bad else {
            return RegularGraph::new(Graph { adj });
        };
        let c = rng.gen_range(0..n);
        let d = adj[c][rng.gen_range(0..delta)];
        if [a, b].contains(&c) || [a, b].contains(&d) || adj[a].contains(&c) || adj[b].contains(&d) {
            continue;
        }
        let swap = |adj: &mut Vec<Vec<usize>>, x: usize, old: usize, new: usize| {
            let pos = adj[x].iter().position(|&y| y == old).expect("edge present");
            adj[x][pos] = new;
            adj[x].sort_unstable();
        };
        // (a, b), (c, d) -> (a, c), (b, d)
        swap(&mut adj, a, b, c);
        swap(&mut adj, b, a, d);
        swap(&mut adj, c, d, a);
        swap(&mut adj, d, c, b);
        if edge_on_short_cycle(&adj, a, c, min_girth) || edge_on_short_cycle(&adj, b, d, min_girth) {
            swap(&mut adj, a, c, b);
            swap(&mut adj, b, d, a);
            swap(&mut adj, c, a, d);
            swap(&mut adj, d, b, c);
        }
    }
    Err(Error::Graph(format!(
        "could not reach girth {min_girth} on {n} nodes within {max_switches} switches"
    )))
}

/// Graph from a generator spec or an edge-list path.
///
/// Specs: `cycle:N`, `path:N`, `complete:N`, `edge`, `triangle`,
/// `matching:N`, `tree:B:D`, `petersen`, `heawood`, `random:N:D:SEED` and
/// `random:N:D:SEED:GIRTH`.
pub fn from_spec(spec: &str) -> Result<Graph> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> Result<usize> {
        parts
            .get(i)
            .ok_or_else(|| Error::Graph(format!("spec {spec:?} is missing field {i}")))?
            .parse::<usize>()
            .map_err(|e| Error::Graph(format!("spec {spec:?}: {e}")))
    };
    match parts[0] {
        "cycle" => Ok(cycle(num(1)?)?.into_graph()),
        "path" => path(num(1)?),
        "complete" => complete(num(1)?),
        "edge" => path(2),
        "triangle" => complete(3),
        "matching" => Ok(perfect_matching(num(1)?)?.into_graph()),
        "tree" => regular_tree(num(1)?, num(2)?),
        "petersen" | "heawood" => Ok(named(parts[0])?.into_graph()),
        "random" => {
            let (n, d, seed) = (num(1)?, num(2)?, num(3)? as u64);
            let g = if parts.len() > 4 {
                random_regular_with_girth(n, d, num(4)?, seed)?
            } else {
                random_regular(n, d, seed)?
            };
            Ok(g.into_graph())
        }
        _ => {
            let text = std::fs::read_to_string(spec)?;
            Graph::parse_edge_list(&text)
        }
    }
}
