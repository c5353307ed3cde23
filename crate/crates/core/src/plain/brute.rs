//! Exhaustive cycle packing — the independent oracle.
//!
//! Enumerates every simple directed cycle of bounded length in an
//! adjacency matrix and searches all vertex-disjoint combinations for the
//! one covering the most vertices. Exponential and happily so; it exists to
//! check the optimizers, not to compete with them.

use std::collections::HashMap;

/// A cycle as its vertex sequence, starting at its smallest vertex; the
/// edges are consecutive pairs plus the wrap-around.
pub type Cycle = Vec<usize>;

/// All simple cycles of length `2..=max_len`, canonical (rotation starts at
/// the smallest vertex), in deterministic order.
pub fn enumerate_cycles(adj: &[Vec<u8>], max_len: usize) -> Vec<Cycle> {
    let n = adj.len();
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(max_len);
    fn dfs(
        adj: &[Vec<u8>],
        start: usize,
        cur: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Cycle>,
    ) {
        for next in start + 1..adj.len() {
            if path.contains(&next) || adj[cur][next] == 0 {
                continue;
            }
            path.push(next);
            if path.len() >= 2 && adj[next][start] == 1 {
                out.push(path.clone());
            }
            if path.len() < max_len {
                dfs(adj, start, next, max_len, path, out);
            }
            path.pop();
        }
    }
    for start in 0..n {
        path.clear();
        path.push(start);
        dfs(adj, start, start, max_len, &mut path, &mut out);
    }
    out
}

/// Maximum number of vertices coverable by vertex-disjoint cycles of length
/// at most `max_len`, plus one optimal cycle set.
pub fn brute_force_kep(adj: &[Vec<u8>], max_len: usize) -> (usize, Vec<Cycle>) {
    assert!(adj.len() <= 20, "oracle is for small instances");
    let cycles = enumerate_cycles(adj, max_len);
    let masks: Vec<u32> = cycles
        .iter()
        .map(|c| c.iter().fold(0u32, |m, &v| m | 1 << v))
        .collect();
    let mut memo: HashMap<(usize, u32), usize> = HashMap::new();

    fn best(
        idx: usize,
        used: u32,
        cycles: &[Cycle],
        masks: &[u32],
        memo: &mut HashMap<(usize, u32), usize>,
    ) -> usize {
        if idx == cycles.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(idx, used)) {
            return v;
        }
        let mut v = best(idx + 1, used, cycles, masks, memo);
        if masks[idx] & used == 0 {
            v = v.max(cycles[idx].len() + best(idx + 1, used | masks[idx], cycles, masks, memo));
        }
        memo.insert((idx, used), v);
        v
    }

    let total = best(0, 0, &cycles, &masks, &mut memo);

    // reconstruct one optimal selection greedily against the memo
    let mut chosen = Vec::new();
    let mut used = 0u32;
    let mut idx = 0;
    let mut remaining = total;
    while remaining > 0 && idx < cycles.len() {
        let skip = best(idx + 1, used, &cycles, &masks, &mut memo);
        if skip == remaining {
            idx += 1;
            continue;
        }
        chosen.push(cycles[idx].clone());
        used |= masks[idx];
        remaining -= cycles[idx].len();
        idx += 1;
    }
    (total, chosen)
}
