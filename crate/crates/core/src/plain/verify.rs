//! Structural verification of exchange outputs.

/// Check that donor/recipient index vectors describe vertex-disjoint
/// exchange cycles of length `2..=max_len` over existing edges.
///
/// Indices are 1-based with 0 meaning "no exchange"; `recipient[i]` is the
/// pair whose patient receives from pair `i`'s donor (the edge `i -> j`),
/// `donor[i]` the pair whose donor serves pair `i`'s patient.
pub fn verify_solution(
    donor: &[u64],
    recipient: &[u64],
    adj: &[Vec<u8>],
    max_len: usize,
) -> bool {
    let n = adj.len();
    if donor.len() != n || recipient.len() != n {
        return false;
    }
    for i in 0..n {
        let (d, r) = (donor[i], recipient[i]);
        if (d == 0) != (r == 0) {
            return false;
        }
        if d > n as u64 || r > n as u64 {
            return false;
        }
        if r != 0 {
            let j = (r - 1) as usize;
            // the claimed edge must exist and be mutually consistent
            if adj[i][j] == 0 || donor[j] != i as u64 + 1 {
                return false;
            }
        }
        if d != 0 {
            let j = (d - 1) as usize;
            if adj[j][i] == 0 || recipient[j] != i as u64 + 1 {
                return false;
            }
        }
    }
    // follow recipient pointers: every matched pair closes a cycle of
    // admissible length
    let mut seen = vec![false; n];
    for i in 0..n {
        if recipient[i] == 0 || seen[i] {
            continue;
        }
        let mut len = 0usize;
        let mut cur = i;
        loop {
            if seen[cur] {
                return false; // lasso, not a simple cycle
            }
            seen[cur] = true;
            len += 1;
            if len > max_len {
                return false;
            }
            cur = (recipient[cur] - 1) as usize;
            if cur == i {
                break;
            }
        }
        if len < 2 {
            return false;
        }
    }
    true
}
