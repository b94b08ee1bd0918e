//! UGM hypergraphs: node/edge/clique types, the running intersection
//! property, and lifted cycles of cliques.
//!
//! The edge set of a UGM hypergraph is the union of the power sets
//! (minus singletons and the empty set) of its maximal cliques. Variable
//! slots are laid out as nodes first, then edges in canonical order
//! (size ascending, then lexicographic), so that the same hypergraph
//! always produces the same LP column layout.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

/// Dense 0-based node index (a pixel or a message bit).
pub type NodeId = usize;

/// Power sets are enumerated with bit masks; beyond this rank they are
/// pointless anyway (all applications have rank <= 6).
pub const RANK_CAP: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("clique {index} has fewer than 2 nodes")]
    CliqueTooSmall { index: usize },
    #[error("clique {index} references node {node} outside [0, {node_count})")]
    NodeOutOfRange {
        index: usize,
        node: NodeId,
        node_count: usize,
    },
    #[error("clique {contained} is contained in clique {container}; the clique list must be maximal")]
    NonMaximalClique { contained: usize, container: usize },
    #[error("clique {index} has {size} nodes, above the rank cap {cap}")]
    RankTooLarge { index: usize, size: usize, cap: usize },
}

fn canonical_nodes(nodes: impl IntoIterator<Item = NodeId>) -> Vec<NodeId> {
    let mut v: Vec<NodeId> = nodes.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// A hypergraph edge: a sorted set of at least two nodes.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Edge {
    nodes: Vec<NodeId>,
}

impl Edge {
    /// Canonicalizes the node list. Panics if fewer than two distinct
    /// nodes remain; edges of size < 2 are never meaningful.
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let nodes = canonical_nodes(nodes);
        assert!(nodes.len() >= 2, "an edge needs at least two nodes");
        Edge { nodes }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &[NodeId]) -> bool {
        self.nodes.iter().all(|v| other.binary_search(v).is_ok())
    }
}

// Canonical edge order: size ascending, then lexicographic.
impl Ord for Edge {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.nodes
            .len()
            .cmp(&other.nodes.len())
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

impl PartialOrd for Edge {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A maximal clique of the underlying graph. Maximality is the caller's
/// responsibility; [`Hypergraph::build`] checks it.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clique {
    nodes: Vec<NodeId>,
}

impl Clique {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Self {
        Clique {
            nodes: canonical_nodes(nodes),
        }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn intersection(&self, other: &Clique) -> Vec<NodeId> {
        self.nodes
            .iter()
            .copied()
            .filter(|v| other.contains(*v))
            .collect()
    }
}

impl fmt::Display for Clique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

fn subset(a: &[NodeId], b: &[NodeId]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}

/// A UGM hypergraph: nodes plus the deduplicated union of all clique
/// power sets (subsets of size >= 2).
#[derive(Clone, Debug)]
pub struct Hypergraph {
    node_count: usize,
    edges: Vec<Edge>,
    cliques: Vec<Clique>,
    edge_index: HashMap<Vec<NodeId>, usize>,
}

impl Hypergraph {
    /// Builds the hypergraph from a maximal clique list.
    pub fn build(cliques: Vec<Clique>, node_count: usize) -> Result<Self, HypergraphError> {
        for (index, c) in cliques.iter().enumerate() {
            if c.len() < 2 {
                return Err(HypergraphError::CliqueTooSmall { index });
            }
            if c.len() > RANK_CAP {
                return Err(HypergraphError::RankTooLarge {
                    index,
                    size: c.len(),
                    cap: RANK_CAP,
                });
            }
            if let Some(&node) = c.nodes().iter().find(|&&v| v >= node_count) {
                return Err(HypergraphError::NodeOutOfRange {
                    index,
                    node,
                    node_count,
                });
            }
        }
        for i in 0..cliques.len() {
            for j in 0..cliques.len() {
                if i != j && subset(cliques[i].nodes(), cliques[j].nodes()) {
                    return Err(HypergraphError::NonMaximalClique {
                        contained: i,
                        container: j,
                    });
                }
            }
        }

        let mut set: BTreeSet<Edge> = BTreeSet::new();
        for c in &cliques {
            let r = c.len();
            for mask in 1u32..(1u32 << r) {
                if mask.count_ones() < 2 {
                    continue;
                }
                let nodes: Vec<NodeId> = (0..r)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| c.nodes()[i])
                    .collect();
                set.insert(Edge { nodes });
            }
        }
        let edges: Vec<Edge> = set.into_iter().collect();
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.nodes.clone(), i))
            .collect();
        Ok(Hypergraph {
            node_count,
            edges,
            cliques,
            edge_index,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    pub fn rank(&self) -> usize {
        self.cliques.iter().map(Clique::len).max().unwrap_or(0)
    }

    /// Total variable slots: one per node, then one per edge.
    pub fn num_slots(&self) -> usize {
        self.node_count + self.edges.len()
    }

    pub fn node_slot(&self, v: NodeId) -> usize {
        debug_assert!(v < self.node_count);
        v
    }

    /// Slot of the edge with exactly these nodes (sorted or not).
    pub fn edge_slot(&self, nodes: &[NodeId]) -> Option<usize> {
        let key = canonical_nodes(nodes.iter().copied());
        self.edge_index.get(&key).map(|i| self.node_count + i)
    }

    /// Slot of an arbitrary nonempty node set: a singleton maps to its
    /// node slot, anything larger to its edge slot.
    pub fn slot(&self, nodes: &[NodeId]) -> Option<usize> {
        match nodes.len() {
            0 => None,
            1 => (nodes[0] < self.node_count).then_some(nodes[0]),
            _ => self.edge_slot(nodes),
        }
    }

    pub fn slot_name(&self, slot: usize) -> String {
        if slot < self.node_count {
            format!("z{slot}")
        } else {
            let e = &self.edges[slot - self.node_count];
            let mut s = String::from("z");
            for v in e.nodes() {
                write!(s, "_{v}").unwrap();
            }
            s
        }
    }

    /// Textual dump: `nodes <n>`, one `clique ...` line per clique, one
    /// `edge ...` line per derived edge, in canonical order.
    pub fn dump(&self) -> String {
        let mut out = format!("nodes {}\n", self.node_count);
        for c in &self.cliques {
            out.push_str("clique");
            for v in c.nodes() {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        for e in &self.edges {
            out.push_str("edge");
            for v in e.nodes() {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// A running intersection ordering of a set family, together with the
/// induced neighborhood sets N(p_k).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RipOrdering {
    /// Indices into the input family, in RIP order p_1..p_m.
    pub order: Vec<usize>,
    /// N(p_k) = p_k intersected with the union of its predecessors.
    pub neighborhoods: Vec<Vec<NodeId>>,
}

/// Finds a running intersection ordering by Graham-style elimination:
/// repeatedly remove a set whose intersection with the union of the
/// remaining sets is contained in a single other remaining set. The
/// family has the RIP iff elimination empties it; the RIP ordering is
/// the reverse elimination order.
pub fn running_intersection_ordering(sets: &[Vec<NodeId>]) -> Option<RipOrdering> {
    assert!(!sets.is_empty(), "empty family");
    assert!(sets.iter().all(|s| !s.is_empty()), "empty member set");
    let sets: Vec<BTreeSet<NodeId>> = sets.iter().map(|s| s.iter().copied().collect()).collect();

    let mut alive: Vec<bool> = vec![true; sets.len()];
    let mut removed_rev: Vec<usize> = Vec::with_capacity(sets.len());
    for _ in 0..sets.len() {
        let candidates: Vec<usize> = (0..sets.len()).filter(|&i| alive[i]).collect();
        if candidates.len() == 1 {
            removed_rev.push(candidates[0]);
            alive[candidates[0]] = false;
            break;
        }
        let mut removed = None;
        'outer: for &i in &candidates {
            let inter: BTreeSet<NodeId> = sets[i]
                .iter()
                .copied()
                .filter(|v| candidates.iter().any(|&j| j != i && sets[j].contains(v)))
                .collect();
            for &j in &candidates {
                if j != i && inter.is_subset(&sets[j]) {
                    removed = Some(i);
                    break 'outer;
                }
            }
        }
        let i = removed?;
        removed_rev.push(i);
        alive[i] = false;
    }

    let order: Vec<usize> = removed_rev.into_iter().rev().collect();
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut neighborhoods = Vec::with_capacity(order.len());
    for &i in &order {
        let n: Vec<NodeId> = sets[i].iter().copied().filter(|v| seen.contains(v)).collect();
        neighborhoods.push(n);
        seen.extend(sets[i].iter().copied());
    }
    Some(RipOrdering { order, neighborhoods })
}

/// A cyclic arrangement of cliques C_1..C_m sharing one node v-bar, with
/// consecutive cliques meeting in exactly {v_i, v-bar} and all link
/// nodes v_i distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedCliqueCycle {
    pub cliques: Vec<Clique>,
    /// Indices of the cycle's cliques in the originating clique list.
    pub clique_indices: Vec<usize>,
    pub shared_node: NodeId,
    /// link_nodes[i] is v_i with C_i /\ C_{i+1} = {v_i, shared_node}.
    pub link_nodes: Vec<NodeId>,
}

impl LiftedCliqueCycle {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }
}

/// Enumerates every lifted cycle of cliques of length 3..=max_len, once
/// per rotation/reflection class (canonical form: lowest clique index
/// first, lower-indexed neighbor second).
pub fn enumerate_lifted_clique_cycles(cliques: &[Clique], max_len: usize) -> Vec<LiftedCliqueCycle> {
    assert!(max_len >= 3, "cycles have at least three cliques");
    let node_count = cliques
        .iter()
        .flat_map(|c| c.nodes().iter().copied())
        .max()
        .map_or(0, |v| v + 1);
    let mut by_node: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    for (i, c) in cliques.iter().enumerate() {
        if c.len() >= 3 {
            for &v in c.nodes() {
                by_node[v].push(i);
            }
        }
    }

    let mut out = Vec::new();
    for shared in 0..node_count {
        let members = &by_node[shared];
        if members.len() < 3 {
            continue;
        }
        // adjacency within this candidate hub: link[a][b] = Some(v_i)
        let k = members.len();
        let mut link: Vec<Vec<Option<NodeId>>> = vec![vec![None; k]; k];
        for a in 0..k {
            for b in (a + 1)..k {
                let inter = cliques[members[a]].intersection(&cliques[members[b]]);
                if inter.len() == 2 && inter.contains(&shared) {
                    let other = if inter[0] == shared { inter[1] } else { inter[0] };
                    link[a][b] = Some(other);
                    link[b][a] = Some(other);
                }
            }
        }
        // DFS for simple cycles whose lowest member is the start.
        for start in 0..k {
            let mut path = vec![start];
            let mut links: Vec<NodeId> = Vec::new();
            dfs_cycles(
                &link,
                max_len,
                start,
                &mut path,
                &mut links,
                &mut |path, links| {
                    // closing link between last and start
                    out.push(LiftedCliqueCycle {
                        cliques: path.iter().map(|&p| cliques[members[p]].clone()).collect(),
                        clique_indices: path.iter().map(|&p| members[p]).collect(),
                        shared_node: shared,
                        link_nodes: links.to_vec(),
                    });
                },
            );
        }
    }
    out
}

fn dfs_cycles(
    link: &[Vec<Option<NodeId>>],
    max_len: usize,
    start: usize,
    path: &mut Vec<usize>,
    links: &mut Vec<NodeId>,
    emit: &mut impl FnMut(&[usize], &[NodeId]),
) {
    let cur = *path.last().unwrap();
    if path.len() >= 3 {
        if let Some(close) = link[cur][start] {
            // reflection dedup: second member below last member
            if path[1] < *path.last().unwrap() && !links.contains(&close) {
                links.push(close);
                emit(path, links);
                links.pop();
            }
        }
    }
    if path.len() == max_len {
        return;
    }
    for next in (start + 1)..link.len() {
        if path.contains(&next) {
            continue;
        }
        if let Some(v) = link[cur][next] {
            if links.contains(&v) {
                continue;
            }
            path.push(next);
            links.push(v);
            dfs_cycles(link, max_len, start, path, links, emit);
            links.pop();
            path.pop();
        }
    }
}
