//! Structural interventional distance between two DAGs.
//!
//! For every ordered variable pair `(i, j)` the estimated graph's parent set
//! of `i` is used the way a practitioner would use it: as an adjustment set
//! for the effect of `i` on `j`. The pair counts as an error when that
//! adjustment is not valid in the true graph. Validity is decided with the
//! graphical adjustment criterion (forbidden-set check plus d-separation in
//! the proper back-door graph); an independent distribution-level oracle in
//! the test suite cross-checks every verdict on small graphs.

use super::graph::CausalGraph;
use crate::env::VarId;
use crate::error::{Error, Result};

/// Largest graph `sid` will evaluate; the check is exhaustive over pairs and
/// meant for desk-scale variable counts.
pub const SID_NODE_CAP: usize = 12;

pub fn sid(truth: &CausalGraph, estimate: &CausalGraph) -> Result<usize> {
    sid_with_cap(truth, estimate, SID_NODE_CAP)
}

pub fn sid_with_cap(truth: &CausalGraph, estimate: &CausalGraph, cap: usize) -> Result<usize> {
    if truth.len() != estimate.len() {
        return Err(Error::GraphSizeMismatch(truth.len(), estimate.len()));
    }
    if truth.len() > cap {
        return Err(Error::GraphTooLarge(truth.len(), cap));
    }
    if !truth.is_acyclic() || !estimate.is_acyclic() {
        return Err(Error::CyclicGraph);
    }
    let m = truth.len();
    let mut count = 0;
    for i in 0..m {
        let z = estimate.parents(i);
        for j in 0..m {
            if i == j {
                continue;
            }
            if !intervention_estimate_correct(truth, i, j, &z) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Would adjusting on `z` (the estimate's parents of `i`) give the correct
/// interventional distribution of `j` under `do(i)` in `truth`?
pub fn intervention_estimate_correct(
    truth: &CausalGraph,
    i: VarId,
    j: VarId,
    z: &[VarId],
) -> bool {
    let m = truth.len();
    let mut in_z = vec![false; m];
    for &v in z {
        in_z[v] = true;
    }
    let desc_i = proper_descendants(truth, i);
    if in_z[j] {
        // The estimate treats j as a parent of i and predicts a null effect;
        // that is right exactly when j is not a true descendant of i.
        return !desc_i[j];
    }
    // Nodes on proper causal paths i -> ... -> j.
    let mut causal_nodes = vec![false; m];
    for w in 0..m {
        if w != i && desc_i[w] && (w == j || proper_descendants(truth, w)[j]) {
            causal_nodes[w] = true;
        }
    }
    // Forbidden set: every descendant (self included) of a causal-path node.
    let mut forbidden = vec![false; m];
    for w in 0..m {
        if causal_nodes[w] {
            forbidden[w] = true;
            let d = proper_descendants(truth, w);
            for v in 0..m {
                if d[v] {
                    forbidden[v] = true;
                }
            }
        }
    }
    if z.iter().any(|&v| forbidden[v]) {
        return false;
    }
    // Proper back-door graph: drop the first edge of every proper causal path.
    let mut backdoor = truth.clone();
    for c in truth.children(i) {
        if causal_nodes[c] {
            backdoor.set_edge(c, i, false);
        }
    }
    !d_connected(&backdoor, i, j, &in_z)
}

/// All nodes reachable from `v` through one or more cause-to-effect edges.
fn proper_descendants(g: &CausalGraph, v: VarId) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut queue = vec![v];
    while let Some(w) = queue.pop() {
        for c in g.children(w) {
            if !seen[c] {
                seen[c] = true;
                queue.push(c);
            }
        }
    }
    seen
}

/// d-connection test between `x` and `y` given the conditioning set `z`,
/// via the standard reachable-trail traversal over (node, direction) states.
fn d_connected(g: &CausalGraph, x: VarId, y: VarId, z: &[bool]) -> bool {
    let m = g.len();
    // `active[v]`: v is in z or has a descendant in z (collider openers).
    let mut active = z.to_vec();
    let mut queue: Vec<VarId> = (0..m).filter(|&v| z[v]).collect();
    while let Some(w) = queue.pop() {
        for p in g.parents(w) {
            if !active[p] {
                active[p] = true;
                queue.push(p);
            }
        }
    }
    // States: (node, arrived-against-arrow). Arriving "up" means the trail
    // entered the node from one of its children.
    let mut visited = vec![[false; 2]; m];
    let mut stack = vec![(x, true)];
    while let Some((node, up)) = stack.pop() {
        let dir = usize::from(up);
        if visited[node][dir] {
            continue;
        }
        visited[node][dir] = true;
        if node == y {
            return true;
        }
        if up {
            if !z[node] {
                for p in g.parents(node) {
                    stack.push((p, true));
                }
                for c in g.children(node) {
                    stack.push((c, false));
                }
            }
        } else {
            if !z[node] {
                for c in g.children(node) {
                    stack.push((c, false));
                }
            }
            if active[node] {
                for p in g.parents(node) {
                    stack.push((p, true));
                }
            }
        }
    }
    false
}
