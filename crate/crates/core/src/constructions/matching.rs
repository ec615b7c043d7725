//! Augmenting-path bipartite matching.

/// Matches every left vertex to a distinct right vertex, trying right
/// vertices in the order given by `adj`. Returns `match_of_left`, or
/// `None` if no left-saturating matching exists.
pub fn left_saturating_matching(adj: &[Vec<usize>], right_count: usize) -> Option<Vec<usize>> {
    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[u] {
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }

    let mut owner: Vec<Option<usize>> = vec![None; right_count];
    for u in 0..adj.len() {
        let mut seen = vec![false; right_count];
        if !augment(u, adj, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut out = vec![usize::MAX; adj.len()];
    for (v, o) in owner.iter().enumerate() {
        if let Some(u) = o {
            out[*u] = v;
        }
    }
    Some(out)
}
