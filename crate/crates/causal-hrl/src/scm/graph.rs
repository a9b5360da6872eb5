//! Binary causal graphs over environment variables, with the structural
//! Hamming distance, DOT/JSON export, and confidence-guided cycle pruning.

use serde::{Deserialize, Serialize};

use crate::env::VarId;
use crate::error::{Error, Result};

/// Adjacency over `m` variables; `adj[i][j] = true` means variable `j` is a
/// direct cause (parent) of variable `i`. The diagonal is always false in
/// reported graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    m: usize,
    adj: Vec<bool>,
}

impl CausalGraph {
    pub fn empty(m: usize) -> Self {
        Self {
            m,
            adj: vec![false; m * m],
        }
    }

    /// Builds from `(effect, cause)` pairs.
    pub fn from_edges(m: usize, edges: &[(VarId, VarId)]) -> Self {
        let mut g = Self::empty(m);
        for &(effect, cause) in edges {
            g.set_edge(effect, cause, true);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn has_edge(&self, effect: VarId, cause: VarId) -> bool {
        self.adj[effect * self.m + cause]
    }

    pub fn set_edge(&mut self, effect: VarId, cause: VarId, present: bool) {
        if effect == cause {
            return; // self edges are never represented
        }
        self.adj[effect * self.m + cause] = present;
    }

    pub fn parents(&self, effect: VarId) -> Vec<VarId> {
        (0..self.m).filter(|&j| self.has_edge(effect, j)).collect()
    }

    pub fn children(&self, cause: VarId) -> Vec<VarId> {
        (0..self.m).filter(|&i| self.has_edge(i, cause)).collect()
    }

    /// Edges as `(effect, cause)` pairs in row-major order.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for i in 0..self.m {
            for j in 0..self.m {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }

    pub fn is_isolated(&self, v: VarId) -> bool {
        self.parents(v).is_empty() && self.children(v).is_empty()
    }

    /// True when the cause-to-effect digraph has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Returns some directed cycle as a list of `(effect, cause)` edges, or
    /// `None` when acyclic.
    pub fn find_cycle(&self) -> Option<Vec<(VarId, VarId)>> {
        // Iterative DFS over cause -> effect edges with an explicit stack.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            White,
            Grey,
            Black,
        }
        let mut mark = vec![Mark::White; self.m];
        for start in 0..self.m {
            if mark[start] != Mark::White {
                continue;
            }
            let mut stack: Vec<(VarId, Vec<VarId>, usize)> =
                vec![(start, self.children(start), 0)];
            mark[start] = Mark::Grey;
            let mut path = vec![start];
            while let Some((node, children, idx)) = stack.last_mut() {
                if *idx < children.len() {
                    let next = children[*idx];
                    *idx += 1;
                    match mark[next] {
                        Mark::White => {
                            mark[next] = Mark::Grey;
                            path.push(next);
                            stack.push((next, self.children(next), 0));
                        }
                        Mark::Grey => {
                            // Found a cycle: slice of path from `next` onward.
                            let pos = path.iter().position(|&p| p == next).unwrap();
                            let cycle_nodes = &path[pos..];
                            let mut edges = Vec::new();
                            for w in 0..cycle_nodes.len() {
                                let cause = cycle_nodes[w];
                                let effect = cycle_nodes[(w + 1) % cycle_nodes.len()];
                                edges.push((effect, cause));
                            }
                            return Some(edges);
                        }
                        Mark::Black => {}
                    }
                } else {
                    mark[*node] = Mark::Black;
                    path.pop();
                    stack.pop();
                }
            }
        }
        None
    }

    /// Removes the least-confident edge of every directed cycle until the
    /// graph is acyclic. `confidence[i][j]` scores edge cause `j` -> effect `i`.
    pub fn pruned_acyclic(&self, confidence: &[Vec<f64>]) -> CausalGraph {
        let mut g = self.clone();
        while let Some(cycle) = g.find_cycle() {
            let &(effect, cause) = cycle
                .iter()
                .min_by(|a, b| {
                    confidence[a.0][a.1]
                        .partial_cmp(&confidence[b.0][b.1])
                        .expect("finite confidences")
                })
                .expect("cycle has at least one edge");
            g.set_edge(effect, cause, false);
        }
        g
    }

    /// DOT rendering with cause -> effect arrows; isolated nodes are omitted.
    pub fn to_dot(&self, names: &[String]) -> String {
        let mut out = String::from("digraph causal {\n  rankdir=LR;\n");
        for v in 0..self.m {
            if !self.is_isolated(v) {
                out.push_str(&format!("  n{} [label=\"{}\"];\n", v, names[v]));
            }
        }
        for (effect, cause) in self.edges() {
            out.push_str(&format!("  n{cause} -> n{effect};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Structural Hamming distance: the number of off-diagonal adjacency entries
/// on which the two graphs disagree.
pub fn shd(a: &CausalGraph, b: &CausalGraph) -> Result<usize> {
    if a.m != b.m {
        return Err(Error::GraphSizeMismatch(a.m, b.m));
    }
    let mut count = 0;
    for i in 0..a.m {
        for j in 0..a.m {
            if i != j && a.has_edge(i, j) != b.has_edge(i, j) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// On-disk graph format: `{"M", "names", "edges", "sigma_eta"}` where edges
/// are `[effect, cause]` pairs and `sigma_eta` is the full soft-adjacency
/// snapshot (0/1 for ground-truth exports).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(rename = "M")]
    pub m: usize,
    pub names: Vec<String>,
    pub edges: Vec<(VarId, VarId)>,
    pub sigma_eta: Vec<Vec<f64>>,
}

impl GraphFile {
    pub fn new(graph: &CausalGraph, names: Vec<String>, sigma_eta: Vec<Vec<f64>>) -> Self {
        Self {
            m: graph.len(),
            names,
            edges: graph.edges(),
            sigma_eta,
        }
    }

    pub fn from_truth(graph: &CausalGraph, names: Vec<String>) -> Self {
        let m = graph.len();
        let sigma = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if graph.has_edge(i, j) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::new(graph, names, sigma)
    }

    pub fn graph(&self) -> Result<CausalGraph> {
        for &(i, j) in &self.edges {
            if i >= self.m || j >= self.m {
                return Err(Error::Schema(format!(
                    "edge ({i},{j}) out of range for M={}",
                    self.m
                )));
            }
        }
        Ok(CausalGraph::from_edges(self.m, &self.edges))
    }
}
