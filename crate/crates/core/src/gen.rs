//! Topology models: the finite square lattice with next-nearest-neighbor
//! edges, Erdős–Rényi, Barabási–Albert and the Kumpula weighted community
//! model, plus link dilution and bridge augmentation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::graph::{GraphError, NodeId, NodeRole, RoleGraph};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq)]
pub enum GenError {
    InvalidParams(String),
    Graph(GraphError),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::InvalidParams(s) => write!(f, "invalid generator parameters: {s}"),
            GenError::Graph(e) => write!(f, "graph construction failed: {e}"),
        }
    }
}

impl core::error::Error for GenError {}

impl From<GraphError> for GenError {
    fn from(e: GraphError) -> Self {
        GenError::Graph(e)
    }
}

/// Parameters of the Kumpula et al. weighted growth model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KumpulaParams {
    /// global (random) attachment probability per node per sweep
    pub p_r: f64,
    /// node deletion probability per node per sweep
    pub p_d: f64,
    /// weight of newly created links
    pub w0: f64,
    /// weight reinforcement of traversed and created links
    pub delta: f64,
    /// maximum number of sweeps; the run may stop earlier at stationarity
    pub sweeps: usize,
}

impl Default for KumpulaParams {
    /// Calibrated so the stationary average degree is near 12 at n = 5000.
    /// With forced triadic closure the degree is insensitive to delta over
    /// a wide range and is governed by the deletion rate instead. The
    /// global-attachment rate is kept high enough that the community blobs
    /// stay globally connected under heavy link dilution.
    fn default() -> Self {
        KumpulaParams { p_r: 0.05, p_d: 0.035, w0: 1.0, delta: 1000.0, sweeps: 25_000 }
    }
}

/// A topology model together with everything needed to realize it.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// side^2 nodes on a square grid, edges at Manhattan distance 1 or 2.
    LatticeNnn { side: usize },
    Er { n: usize, avg_degree: f64, seed: u64 },
    Ba { n: usize, m: usize, seed: u64 },
    Kumpula { n: usize, params: KumpulaParams, seed: u64 },
}

impl ModelSpec {
    pub fn generate(&self) -> Result<RoleGraph, GenError> {
        match *self {
            ModelSpec::LatticeNnn { side } => gen_lattice_nnn(side),
            ModelSpec::Er { n, avg_degree, seed } => gen_er(n, avg_degree, seed),
            ModelSpec::Ba { n, m, seed } => gen_ba(n, m, seed),
            ModelSpec::Kumpula { n, params, seed } => gen_kumpula(n, &params, seed),
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            ModelSpec::LatticeNnn { side } => side * side,
            ModelSpec::Er { n, .. } | ModelSpec::Ba { n, .. } | ModelSpec::Kumpula { n, .. } => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::LatticeNnn { .. } => "lattice",
            ModelSpec::Er { .. } => "er",
            ModelSpec::Ba { .. } => "ba",
            ModelSpec::Kumpula { .. } => "kumpula",
        }
    }
}

/// Finite square lattice with next-nearest-neighbor interactions: nodes
/// [i,j], 1 <= i,j <= side, linked where |di|+|dj| is 1 or 2. Interior
/// degree is 12.
pub fn gen_lattice_nnn(side: usize) -> Result<RoleGraph, GenError> {
    if side < 3 {
        return Err(GenError::InvalidParams(format!("lattice side must be >= 3, got {side}")));
    }
    let id_of = |i: usize, j: usize| -> NodeId { ((i - 1) * side + (j - 1)) as NodeId };
    let nodes: Vec<(NodeId, NodeRole)> = (1..=side)
        .flat_map(|i| (1..=side).map(move |j| (id_of(i, j), NodeRole::Model)))
        .collect();
    let mut g = RoleGraph::with_nodes(&nodes)?;
    // unordered offsets with |di| + |dj| in {1, 2}
    const OFFSETS: [(isize, isize); 6] = [(0, 1), (1, 0), (1, 1), (1, -1), (0, 2), (2, 0)];
    for i in 1..=side as isize {
        for j in 1..=side as isize {
            for (di, dj) in OFFSETS {
                let (ni, nj) = (i + di, j + dj);
                if ni >= 1 && ni <= side as isize && nj >= 1 && nj <= side as isize {
                    g.add_edge(id_of(i as usize, j as usize), id_of(ni as usize, nj as usize))?;
                }
            }
        }
    }
    Ok(g)
}

/// Erdős–Rényi G(n, p) with p = target_avg_degree / (n - 1).
pub fn gen_er(n: usize, target_avg_degree: f64, seed: u64) -> Result<RoleGraph, GenError> {
    if n < 2 || !(target_avg_degree > 0.0) || target_avg_degree >= (n - 1) as f64 {
        return Err(GenError::InvalidParams(format!(
            "ER needs n >= 2 and 0 < avg_degree < n-1, got n={n}, avg_degree={target_avg_degree}"
        )));
    }
    let p = target_avg_degree / (n - 1) as f64;
    let nodes: Vec<(NodeId, NodeRole)> =
        (0..n).map(|i| (i as NodeId, NodeRole::Model)).collect();
    let mut g = RoleGraph::with_nodes(&nodes)?;
    let mut rng = stream_rng(seed, 0);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                g.add_edge(u as NodeId, v as NodeId)?;
            }
        }
    }
    Ok(g)
}

/// Barabási–Albert preferential attachment starting from a clique on m+1
/// nodes; each newcomer attaches m edges to distinct existing nodes with
/// probability proportional to degree.
pub fn gen_ba(n: usize, m: usize, seed: u64) -> Result<RoleGraph, GenError> {
    if m < 1 || m >= n {
        return Err(GenError::InvalidParams(format!("BA needs 1 <= m < n, got n={n}, m={m}")));
    }
    let nodes: Vec<(NodeId, NodeRole)> =
        (0..n).map(|i| (i as NodeId, NodeRole::Model)).collect();
    let mut g = RoleGraph::with_nodes(&nodes)?;
    let mut rng = stream_rng(seed, 0);
    // each node appears in `stubs` once per unit of degree
    let mut stubs: Vec<usize> = Vec::with_capacity(2 * n * m);
    for u in 0..=m {
        for v in (u + 1)..=m {
            g.add_edge(u as NodeId, v as NodeId)?;
            stubs.push(u);
            stubs.push(v);
        }
    }
    let mut targets: Vec<usize> = Vec::with_capacity(m);
    for new in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = stubs[rng.gen_range(0..stubs.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.add_edge(new as NodeId, t as NodeId)?;
            stubs.push(new);
            stubs.push(t);
        }
    }
    Ok(g)
}

/// Kumpula et al. weighted community model, run to stationarity, weights
/// dropped on output.
///
/// Per sweep every node performs local attachment (weighted two-step
/// neighborhood walk; the open triangle is closed with weight w0 and the
/// traversed and created links are reinforced by delta) and, with
/// probability p_r or always when isolated, global attachment to a uniform
/// random node. Each node loses all links with probability p_d per sweep.
/// The run stops early when the average degree drifts by less than 1% over
/// a window of 10% of the sweep budget.
pub fn gen_kumpula(n: usize, params: &KumpulaParams, seed: u64) -> Result<RoleGraph, GenError> {
    if n < 2 {
        return Err(GenError::InvalidParams(format!("Kumpula needs n >= 2, got {n}")));
    }
    for (name, v) in [("p_r", params.p_r), ("p_d", params.p_d)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(GenError::InvalidParams(format!("{name} must be in [0,1], got {v}")));
        }
    }
    if !(params.w0 > 0.0) || !(params.delta >= 0.0) || params.sweeps == 0 {
        return Err(GenError::InvalidParams(
            "Kumpula needs w0 > 0, delta >= 0 and sweeps >= 1".into(),
        ));
    }

    let mut rng = stream_rng(seed, 0);
    // flat weighted adjacency; degrees stay small, linear scans win
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut edge_count = 0usize;

    let window = (params.sweeps / 10).max(1);
    let mut history: Vec<usize> = Vec::with_capacity(params.sweeps + 1);
    history.push(0);

    fn bump(nbrs: &mut [(usize, f64)], target: usize, delta: f64) {
        if let Some(entry) = nbrs.iter_mut().find(|(t, _)| *t == target) {
            entry.1 += delta;
        }
    }

    for sweep in 0..params.sweeps {
        for i in 0..n {
            // local attachment: i -> j ~ w_ij, j -> k ~ w_jk (k != i)
            if !adj[i].is_empty() {
                if let Some(j) = weighted_pick(&adj[i], usize::MAX, &mut rng) {
                    if let Some(k) = weighted_pick(&adj[j], i, &mut rng) {
                        if !adj[i].iter().any(|&(t, _)| t == k) {
                            adj[i].push((k, params.w0 + params.delta));
                            adj[k].push((i, params.w0 + params.delta));
                            edge_count += 1;
                        } else {
                            bump(&mut adj[i], k, params.delta);
                            bump(&mut adj[k], i, params.delta);
                        }
                        bump(&mut adj[i], j, params.delta);
                        bump(&mut adj[j], i, params.delta);
                        bump(&mut adj[j], k, params.delta);
                        bump(&mut adj[k], j, params.delta);
                    }
                }
            }
            // global attachment
            if adj[i].is_empty() || rng.gen::<f64>() < params.p_r {
                let mut t = rng.gen_range(0..n - 1);
                if t >= i {
                    t += 1;
                }
                if !adj[i].iter().any(|&(x, _)| x == t) {
                    adj[i].push((t, params.w0));
                    adj[t].push((i, params.w0));
                    edge_count += 1;
                }
            }
            // node deletion
            if rng.gen::<f64>() < params.p_d {
                let nbrs: Vec<usize> = adj[i].iter().map(|&(t, _)| t).collect();
                edge_count -= nbrs.len();
                for t in nbrs {
                    adj[t].retain(|&(x, _)| x != i);
                }
                adj[i].clear();
            }
        }
        history.push(edge_count);
        if sweep + 1 >= 2 * window {
            let prev = history[history.len() - 1 - window] as f64;
            let now = edge_count as f64;
            if prev > 0.0 && ((now - prev) / prev).abs() < 0.01 {
                break;
            }
        }
    }

    let nodes: Vec<(NodeId, NodeRole)> =
        (0..n).map(|i| (i as NodeId, NodeRole::Model)).collect();
    let mut g = RoleGraph::with_nodes(&nodes)?;
    for (i, nbrs) in adj.iter().enumerate() {
        for &(j, _) in nbrs.iter() {
            if j > i {
                g.add_edge(i as NodeId, j as NodeId)?;
            }
        }
    }
    Ok(g)
}

fn weighted_pick(nbrs: &[(usize, f64)], exclude: usize, rng: &mut impl Rng) -> Option<usize> {
    let total: f64 = nbrs.iter().filter(|&&(t, _)| t != exclude).map(|&(_, w)| w).sum();
    if total <= 0.0 {
        return None;
    }
    let mut x = rng.gen::<f64>() * total;
    for &(t, w) in nbrs {
        if t == exclude {
            continue;
        }
        x -= w;
        if x <= 0.0 {
            return Some(t);
        }
    }
    nbrs.iter().rev().find(|&&(t, _)| t != exclude).map(|&(t, _)| t)
}

/// Removes each edge independently with probability p and relabels every
/// surviving node White. Isolated nodes stay in the graph; they just never
/// host initiators.
pub fn dilute(g: &RoleGraph, p: f64, seed: u64) -> Result<RoleGraph, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::InvalidParams(format!("dilution p must be in [0,1], got {p}")));
    }
    let nodes: Vec<(NodeId, NodeRole)> =
        g.nodes().map(|(id, _)| (id, NodeRole::White)).collect();
    let mut out = RoleGraph::with_nodes(&nodes)?;
    let mut rng = stream_rng(seed, 0);
    for e in 0..g.edge_count() {
        let keep = rng.gen::<f64>() >= p;
        if keep {
            let (u, v) = g.edge_endpoints(e);
            out.add_edge(g.id(u), g.id(v))?;
        }
    }
    Ok(out)
}

/// Adds `n_bridges` grey degree-2 nodes, each linked to a uniformly random
/// unordered pair of distinct white nodes. Pairs may repeat across bridges.
pub fn add_bridges(g_w: &RoleGraph, n_bridges: usize, seed: u64) -> Result<RoleGraph, GenError> {
    let whites: Vec<NodeId> = g_w
        .nodes()
        .filter(|&(_, role)| role == NodeRole::White)
        .map(|(id, _)| id)
        .collect();
    if whites.len() < 2 {
        return Err(GenError::InvalidParams(format!(
            "bridge attachment needs >= 2 white nodes, got {}",
            whites.len()
        )));
    }
    let mut g = g_w.clone();
    let mut next_id = g.max_id().map_or(0, |m| m + 1);
    let mut rng = stream_rng(seed, 0);
    for _ in 0..n_bridges {
        let a = rng.gen_range(0..whites.len());
        let mut b = rng.gen_range(0..whites.len() - 1);
        if b >= a {
            b += 1;
        }
        let bridge = next_id;
        next_id += 1;
        g.push_node(bridge, NodeRole::Grey)?;
        g.add_edge(bridge, whites[a])?;
        g.add_edge(bridge, whites[b])?;
    }
    Ok(g)
}
