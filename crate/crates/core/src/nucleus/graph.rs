//! Small directed-multigraph helpers over adjacency lists.

/// Strongly connected component id of every vertex (iterative Tarjan).
pub(crate) fn scc_ids(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            if *child < adj[v].len() {
                let w = adj[v][*child];
                *child += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Vertices lying on a directed cycle (including self-loops).
pub(crate) fn on_cycle(adj: &[Vec<usize>]) -> Vec<bool> {
    let comp = scc_ids(adj);
    let mut size = vec![0usize; adj.len()];
    for &c in &comp {
        size[c] += 1;
    }
    (0..adj.len())
        .map(|v| size[comp[v]] > 1 || adj[v].contains(&v))
        .collect()
}

/// Vertices reachable (in zero or more steps) from `sources`.
pub(crate) fn reachable(adj: &[Vec<usize>], sources: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<usize> = Vec::new();
    for s in sources {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_and_reachability() {
        // 0 -> 1 -> 2 -> 1, 3 -> 3, 4 -> 0
        let adj = vec![vec![1], vec![2], vec![1], vec![3], vec![0]];
        assert_eq!(on_cycle(&adj), vec![false, true, true, true, false]);
        assert_eq!(reachable(&adj, [4]), vec![true, true, true, false, true]);
        let ids = scc_ids(&adj);
        assert_eq!(ids[1], ids[2]);
        assert_ne!(ids[0], ids[1]);
    }
}
