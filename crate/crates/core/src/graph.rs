//! Undirected role-labeled static graphs.
//!
//! Houses the underlying projection Γ, the white-only city network `G_w`,
//! its extension `G` with external bridges, and the synthetic model graphs.
//! Graphs are simple (no self-loops, no parallel edges) and immutable after
//! construction; an edge may never join two external (grey/black) nodes.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Opaque node identifier. Hashed user codes map to these through a stable
/// dictionary held by the ingestion layer.
pub type NodeId = u64;

/// Role of a node in a city network or a model graph.
///
/// White: company user with a ZIP code of the city. Grey: company user
/// without a ZIP code. Black: non-company user. Model: synthetic node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRole {
    White,
    Grey,
    Black,
    Model,
}

impl NodeRole {
    /// Grey and black nodes are external to the white city core.
    pub fn is_external(self) -> bool {
        matches!(self, NodeRole::Grey | NodeRole::Black)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeRole::White => "white",
            NodeRole::Grey => "grey",
            NodeRole::Black => "black",
            NodeRole::Model => "model",
        }
    }
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    DuplicateNode(NodeId),
    UnknownNode(NodeId),
    SelfLoop(NodeId),
    /// Edge joining two grey/black nodes.
    ExternalEdge(NodeId, NodeId),
    EmptyGraph,
    NoMatchingNodes,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::DuplicateNode(id) => write!(f, "duplicate node id {id}"),
            GraphError::UnknownNode(id) => write!(f, "edge references unknown node id {id}"),
            GraphError::SelfLoop(id) => write!(f, "self-loop on node {id}"),
            GraphError::ExternalEdge(u, v) => {
                write!(f, "edge {u}-{v} joins two external (grey/black) nodes")
            }
            GraphError::EmptyGraph => write!(f, "operation requires a non-empty graph"),
            GraphError::NoMatchingNodes => write!(f, "no nodes match the role filter"),
        }
    }
}

impl core::error::Error for GraphError {}

/// Undirected simple graph with role-labeled nodes.
///
/// Nodes are addressed externally by [`NodeId`] and internally by dense
/// indices; edges carry dense indices too so per-edge state (delays, event
/// sequences) can live in flat arrays during simulation.
#[derive(Debug, Clone)]
pub struct RoleGraph {
    ids: Vec<NodeId>,
    roles: Vec<NodeRole>,
    index: BTreeMap<NodeId, usize>,
    /// adjacency: (neighbor index, edge index)
    adj: Vec<Vec<(usize, usize)>>,
    /// normalized (min, max) endpoint indices per edge
    edges: Vec<(usize, usize)>,
}

impl RoleGraph {
    /// Builds a graph from a node list and an edge list.
    ///
    /// Duplicate and reversed edge inputs collapse to a single edge.
    pub fn build(
        nodes: &[(NodeId, NodeRole)],
        edges: &[(NodeId, NodeId)],
    ) -> Result<RoleGraph, GraphError> {
        let mut g = RoleGraph::with_nodes(nodes)?;
        for &(u, v) in edges {
            let ui = *g.index.get(&u).ok_or(GraphError::UnknownNode(u))?;
            let vi = *g.index.get(&v).ok_or(GraphError::UnknownNode(v))?;
            g.add_edge_indexed(ui, vi)?;
        }
        Ok(g)
    }

    pub fn with_nodes(nodes: &[(NodeId, NodeRole)]) -> Result<RoleGraph, GraphError> {
        let mut g = RoleGraph {
            ids: Vec::with_capacity(nodes.len()),
            roles: Vec::with_capacity(nodes.len()),
            index: BTreeMap::new(),
            adj: vec![Vec::new(); nodes.len()],
            edges: Vec::new(),
        };
        for &(id, role) in nodes {
            if g.index.insert(id, g.ids.len()).is_some() {
                return Err(GraphError::DuplicateNode(id));
            }
            g.ids.push(id);
            g.roles.push(role);
        }
        Ok(g)
    }

    pub(crate) fn push_node(&mut self, id: NodeId, role: NodeRole) -> Result<usize, GraphError> {
        if self.index.insert(id, self.ids.len()).is_some() {
            return Err(GraphError::DuplicateNode(id));
        }
        self.ids.push(id);
        self.roles.push(role);
        self.adj.push(Vec::new());
        Ok(self.ids.len() - 1)
    }

    /// Inserts an edge by internal indices; no-op when it already exists.
    pub(crate) fn add_edge_indexed(&mut self, ui: usize, vi: usize) -> Result<(), GraphError> {
        if ui == vi {
            return Err(GraphError::SelfLoop(self.ids[ui]));
        }
        if self.roles[ui].is_external() && self.roles[vi].is_external() {
            return Err(GraphError::ExternalEdge(self.ids[ui], self.ids[vi]));
        }
        if self.adj[ui].iter().any(|&(n, _)| n == vi) {
            return Ok(());
        }
        let e = self.edges.len();
        self.edges.push((ui.min(vi), ui.max(vi)));
        self.adj[ui].push((vi, e));
        self.adj[vi].push((ui, e));
        Ok(())
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        let ui = *self.index.get(&u).ok_or(GraphError::UnknownNode(u))?;
        let vi = *self.index.get(&v).ok_or(GraphError::UnknownNode(v))?;
        self.add_edge_indexed(ui, vi)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, idx: usize) -> NodeId {
        self.ids[idx]
    }

    pub fn role(&self, idx: usize) -> NodeRole {
        self.roles[idx]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.adj[idx].len()
    }

    /// Neighbors of a node as (neighbor index, edge index) pairs.
    pub fn neighbors(&self, idx: usize) -> &[(usize, usize)] {
        &self.adj[idx]
    }

    pub fn has_edge(&self, ui: usize, vi: usize) -> bool {
        self.adj[ui].iter().any(|&(n, _)| n == vi)
    }

    /// Edge endpoints by edge index, normalized (min, max).
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, NodeRole)> + '_ {
        self.ids.iter().copied().zip(self.roles.iter().copied())
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().map(move |&(u, v)| (self.ids[u], self.ids[v]))
    }

    pub fn max_id(&self) -> Option<NodeId> {
        self.index.keys().next_back().copied()
    }
}

/// Connected-component partition of a graph.
#[derive(Debug, Clone)]
pub struct ComponentLabeling {
    /// component id per node index
    pub component: Vec<usize>,
    /// size per component id
    pub sizes: Vec<usize>,
    /// id of the largest component; ties broken by the smallest contained
    /// node id
    pub largest: usize,
}

impl ComponentLabeling {
    pub fn largest_size(&self) -> usize {
        if self.sizes.is_empty() {
            0
        } else {
            self.sizes[self.largest]
        }
    }
}

/// Standard connected components by breadth-first search.
pub fn components(g: &RoleGraph) -> ComponentLabeling {
    let n = g.node_count();
    let mut component = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut min_ids: Vec<NodeId> = Vec::new();
    let mut queue = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let cid = sizes.len();
        let mut size = 0usize;
        let mut min_id = g.id(start);
        component[start] = cid;
        queue.push(start);
        while let Some(u) = queue.pop() {
            size += 1;
            min_id = min_id.min(g.id(u));
            for &(v, _) in g.neighbors(u) {
                if component[v] == usize::MAX {
                    component[v] = cid;
                    queue.push(v);
                }
            }
        }
        sizes.push(size);
        min_ids.push(min_id);
    }
    let largest = (0..sizes.len())
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(min_ids[b].cmp(&min_ids[a])))
        .unwrap_or(0);
    ComponentLabeling {
        component,
        sizes,
        largest,
    }
}

/// Relative size of the largest connected component, `P_inf`.
pub fn percolation_fraction(g: &RoleGraph) -> Result<f64, GraphError> {
    if g.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let labeling = components(g);
    Ok(labeling.largest_size() as f64 / g.node_count() as f64)
}

/// Mean degree over nodes matching the role filter (all nodes when `None`).
///
/// Degree counts every incident edge, including edges to non-matching roles.
pub fn avg_degree(g: &RoleGraph, role_filter: Option<NodeRole>) -> Result<f64, GraphError> {
    let mut total = 0usize;
    let mut count = 0usize;
    for idx in 0..g.node_count() {
        if role_filter.map_or(true, |r| g.role(idx) == r) {
            total += g.degree(idx);
            count += 1;
        }
    }
    if count == 0 {
        return Err(GraphError::NoMatchingNodes);
    }
    Ok(total as f64 / count as f64)
}

/// Removes every grey/black node whose degree in the *input* graph is 1.
///
/// Single pass: degrees are read from the input only, so an external node
/// that drops to degree 1 because its neighbor was pruned is kept. The
/// surviving externals of degree >= 2 are the bridges.
pub fn prune_degree_one_externals(g: &RoleGraph) -> RoleGraph {
    let keep: Vec<bool> = (0..g.node_count())
        .map(|i| !(g.role(i).is_external() && g.degree(i) == 1))
        .collect();
    subgraph(g, &keep)
}

/// Iterates [`prune_degree_one_externals`] until no degree-1 external
/// remains.
pub fn prune_externals_fixpoint(g: &RoleGraph) -> RoleGraph {
    let mut current = prune_degree_one_externals(g);
    loop {
        let next = prune_degree_one_externals(&current);
        if next.node_count() == current.node_count() {
            return current;
        }
        current = next;
    }
}

/// Induced subgraph on the nodes marked `true`.
pub fn subgraph(g: &RoleGraph, keep: &[bool]) -> RoleGraph {
    let nodes: Vec<(NodeId, NodeRole)> = (0..g.node_count())
        .filter(|&i| keep[i])
        .map(|i| (g.id(i), g.role(i)))
        .collect();
    let mut out = RoleGraph::with_nodes(&nodes).expect("ids unique in source graph");
    for e in 0..g.edge_count() {
        let (u, v) = g.edge_endpoints(e);
        if keep[u] && keep[v] {
            out.add_edge(g.id(u), g.id(v)).expect("edge valid in source graph");
        }
    }
    out
}

/// Average local clustering coefficient over all nodes.
///
/// Nodes of degree < 2 contribute 0.
pub fn avg_clustering(g: &RoleGraph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for u in 0..n {
        let nbrs = g.neighbors(u);
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        let mut closed = 0usize;
        for a in 0..k {
            for b in (a + 1)..k {
                if g.has_edge(nbrs[a].0, nbrs[b].0) {
                    closed += 1;
                }
            }
        }
        total += closed as f64 / (k * (k - 1) / 2) as f64;
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn white(ids: &[NodeId]) -> Vec<(NodeId, NodeRole)> {
        ids.iter().map(|&i| (i, NodeRole::White)).collect()
    }

    #[test]
    fn reversed_duplicate_edges_collapse() {
        let g = RoleGraph::build(&white(&[1, 2, 3]), &[(1, 2), (2, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn external_external_edge_rejected() {
        let nodes = [(1, NodeRole::Grey), (2, NodeRole::Grey)];
        let err = RoleGraph::build(&nodes, &[(1, 2)]).unwrap_err();
        assert_eq!(err, GraphError::ExternalEdge(1, 2));
        let nodes = [(1, NodeRole::Grey), (2, NodeRole::Black)];
        assert!(RoleGraph::build(&nodes, &[(1, 2)]).is_err());
    }

    #[test]
    fn empty_edge_list_gives_isolated_nodes() {
        let g = RoleGraph::build(&white(&[1, 2, 3]), &[]).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn self_loop_and_unknown_id_rejected() {
        assert_eq!(
            RoleGraph::build(&white(&[1]), &[(1, 1)]).unwrap_err(),
            GraphError::SelfLoop(1)
        );
        assert_eq!(
            RoleGraph::build(&white(&[1]), &[(1, 9)]).unwrap_err(),
            GraphError::UnknownNode(9)
        );
    }

    #[test]
    fn components_path_plus_isolated() {
        let g = RoleGraph::build(&white(&[10, 11, 12, 13]), &[(10, 11), (11, 12)]).unwrap();
        let c = components(&g);
        let mut sizes = c.sizes.clone();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 3]);
        assert_eq!(c.largest_size(), 3);
        for id in [10, 11, 12] {
            assert_eq!(c.component[g.index_of(id).unwrap()], c.largest);
        }
    }

    #[test]
    fn components_empty_graph() {
        let g = RoleGraph::build(&[], &[]).unwrap();
        let c = components(&g);
        assert!(c.sizes.is_empty());
        assert_eq!(c.largest_size(), 0);
    }

    #[test]
    fn component_tie_broken_by_smallest_node_id() {
        // two triangles; insertion order puts the high-id triangle first
        let nodes = white(&[20, 21, 22, 5, 6, 7]);
        let g = RoleGraph::build(&nodes, &[(20, 21), (21, 22), (22, 20), (5, 6), (6, 7), (7, 5)])
            .unwrap();
        let c = components(&g);
        assert_eq!(c.sizes, vec![3, 3]);
        assert_eq!(c.component[g.index_of(5).unwrap()], c.largest);
    }

    #[test]
    fn percolation_fraction_examples() {
        let g = RoleGraph::build(&white(&[1, 2, 3, 4, 5]), &[(1, 2), (2, 3), (4, 5)]).unwrap();
        assert!((percolation_fraction(&g).unwrap() - 0.6).abs() < 1e-12);
        let g = RoleGraph::build(&white(&[1, 2]), &[(1, 2)]).unwrap();
        assert_eq!(percolation_fraction(&g).unwrap(), 1.0);
        let g = RoleGraph::build(&[], &[]).unwrap();
        assert_eq!(percolation_fraction(&g).unwrap_err(), GraphError::EmptyGraph);
    }

    #[test]
    fn avg_degree_star_and_triangle() {
        let nodes = [
            (0, NodeRole::White),
            (1, NodeRole::Black),
            (2, NodeRole::Black),
            (3, NodeRole::Black),
        ];
        let g = RoleGraph::build(&nodes, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(avg_degree(&g, Some(NodeRole::White)).unwrap(), 3.0);
        assert_eq!(avg_degree(&g, Some(NodeRole::Black)).unwrap(), 1.0);
        assert_eq!(
            avg_degree(&g, Some(NodeRole::Grey)).unwrap_err(),
            GraphError::NoMatchingNodes
        );

        let t = RoleGraph::build(&white(&[1, 2, 3]), &[(1, 2), (2, 3), (3, 1)]).unwrap();
        assert_eq!(avg_degree(&t, None).unwrap(), 2.0);
    }

    #[test]
    fn prune_removes_degree_one_external() {
        let nodes = [(1, NodeRole::White), (2, NodeRole::Black)];
        let g = RoleGraph::build(&nodes, &[(1, 2)]).unwrap();
        let p = prune_degree_one_externals(&g);
        assert_eq!(p.node_count(), 1);
        assert_eq!(p.edge_count(), 0);
        assert_eq!(p.id(0), 1);
    }

    #[test]
    fn prune_keeps_degree_two_bridge() {
        let nodes = [
            (1, NodeRole::White),
            (2, NodeRole::Black),
            (3, NodeRole::White),
        ];
        let g = RoleGraph::build(&nodes, &[(1, 2), (2, 3)]).unwrap();
        let p = prune_degree_one_externals(&g);
        assert_eq!(p.node_count(), 3);
        assert_eq!(p.edge_count(), 2);
    }

    #[test]
    fn prune_is_single_pass() {
        // white a - black b(deg 2) - white c, plus black leaf x on a.
        // The leaf goes, the bridge stays; degrees come from the input only.
        let nodes = [
            (1, NodeRole::White),
            (2, NodeRole::Black),
            (3, NodeRole::White),
            (4, NodeRole::Black),
        ];
        let g = RoleGraph::build(&nodes, &[(1, 2), (2, 3), (1, 4)]).unwrap();
        let p = prune_degree_one_externals(&g);
        assert_eq!(p.node_count(), 3);
        assert!(p.index_of(4).is_none());
        assert!(p.index_of(2).is_some());
    }

    #[test]
    fn fixpoint_prune_agrees_on_two_level_chain() {
        // Externals only link to whites and whites are never removed, so a
        // second pass can never find a fresh degree-1 external; the fixpoint
        // variant must agree with the single pass on any valid graph.
        let nodes = [
            (1, NodeRole::White),
            (2, NodeRole::White),
            (3, NodeRole::Black),
            (4, NodeRole::Black),
        ];
        let g = RoleGraph::build(&nodes, &[(1, 3), (2, 3), (2, 4)]).unwrap();
        let once = prune_degree_one_externals(&g);
        let fix = prune_externals_fixpoint(&g);
        assert_eq!(once.node_count(), fix.node_count());
        assert_eq!(once.node_count(), 3);
    }

    #[test]
    fn avg_degree_matches_handshake_lemma() {
        let g = RoleGraph::build(&white(&[1, 2, 3, 4]), &[(1, 2), (2, 3), (3, 4), (4, 1)]).unwrap();
        let expect = 2.0 * g.edge_count() as f64 / g.node_count() as f64;
        assert_eq!(avg_degree(&g, None).unwrap(), expect);
    }

    #[test]
    fn clustering_triangle_vs_path() {
        let t = RoleGraph::build(&white(&[1, 2, 3]), &[(1, 2), (2, 3), (3, 1)]).unwrap();
        assert!((avg_clustering(&t) - 1.0).abs() < 1e-12);
        let p = RoleGraph::build(&white(&[1, 2, 3]), &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(avg_clustering(&p), 0.0);
    }
}
