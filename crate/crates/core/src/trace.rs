//! The branch-and-bound tree trace: the public structure a run reveals.
//!
//! Both the plaintext solver and the secret-shared protocol produce one;
//! the leakage audit checks they are identical, node for node, and that the
//! protocol's opened prune bits spell out exactly this structure.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNode {
    pub id: usize,
    /// `None` for the root.
    pub parent: Option<usize>,
    /// Branch value that created this node (`None` for the root).
    pub branch_value: Option<u8>,
    /// Cut at the bound check without being solved.
    pub pruned: bool,
    /// Simplex iterations spent solving this node (`None` when pruned).
    pub simplex_iterations: Option<usize>,
}

/// Nodes in evaluation order; ids are assigned on dequeue, so the numbering
/// matches the order subproblems are looked at.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TreeTrace {
    pub nodes: Vec<TraceNode>,
}

impl TreeTrace {
    pub fn add_node(&mut self, parent: Option<usize>, branch_value: Option<u8>) -> usize {
        let id = self.nodes.len() + 1; // 1-based, root is node 1
        self.nodes.push(TraceNode {
            id,
            parent,
            branch_value,
            pruned: false,
            simplex_iterations: None,
        });
        id
    }

    pub fn mark_pruned(&mut self, id: usize) {
        self.nodes[id - 1].pruned = true;
    }

    pub fn set_iterations(&mut self, id: usize, iters: usize) {
        self.nodes[id - 1].simplex_iterations = Some(iters);
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn has_children(&self, id: usize) -> bool {
        self.nodes.iter().any(|n| n.parent == Some(id))
    }

    pub fn pruned_ids(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.pruned).map(|n| n.id).collect()
    }

    pub fn total_simplex_iterations(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| n.simplex_iterations)
            .sum()
    }

    /// Per-node iteration counts in evaluation order (pruned nodes omitted).
    pub fn iteration_counts(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter_map(|n| n.simplex_iterations)
            .collect()
    }

    /// The chronological public control decisions: for each node in
    /// evaluation order, the explore bit (1 = bound check passed), then —
    /// for explored nodes — the branch bit (1 = fractional, children
    /// created). This is the exact sequence of prune-labelled openings a
    /// protocol run reveals.
    pub fn control_bits(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.nodes.len() * 2);
        for n in &self.nodes {
            out.push(u8::from(!n.pruned));
            if !n.pruned {
                out.push(u8::from(self.has_children(n.id)));
            }
        }
        out
    }

    /// Structural sanity: children come in pairs, pruned nodes are leaves.
    pub fn check_shape(&self) -> bool {
        if self.nodes.is_empty() || self.node_count() % 2 == 0 {
            return false;
        }
        for n in &self.nodes {
            if n.pruned && self.has_children(n.id) {
                return false;
            }
            if let Some(p) = n.parent {
                let siblings = self
                    .nodes
                    .iter()
                    .filter(|m| m.parent == Some(p))
                    .count();
                if siblings != 2 {
                    return false;
                }
            }
        }
        true
    }
}
