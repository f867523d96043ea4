use std::collections::VecDeque;

use super::CsrMatrix;

/// Reverse Cuthill–McKee ordering of the symmetrized pattern of `a`.
///
/// Returns `perm` with `perm[new] = old`. Each connected component starts from a
/// pseudo-peripheral vertex.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let at = a.transpose();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let mut nb: Vec<usize> = a.row(i).0.iter().chain(at.row(i).0).copied().filter(|&j| j != i).collect();
        nb.sort_unstable();
        nb.dedup();
        adj[i] = nb;
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree, &visited);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Level structure rooted at `root`, restricted to unvisited vertices: (depth, last level).
fn levels(root: usize, adj: &[Vec<usize>], blocked: &[bool]) -> (usize, Vec<usize>) {
    let mut depth_of = vec![usize::MAX; adj.len()];
    depth_of[root] = 0;
    let mut frontier = vec![root];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adj[v] {
                if !blocked[w] && depth_of[w] == usize::MAX {
                    depth_of[w] = depth + 1;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (depth, frontier);
        }
        depth += 1;
        frontier = next;
    }
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize], blocked: &[bool]) -> usize {
    let mut root = seed;
    let (mut ecc, mut last) = levels(root, adj, blocked);
    loop {
        let cand = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let (e, l) = levels(cand, adj, blocked);
        if e <= ecc {
            return root;
        }
        root = cand;
        ecc = e;
        last = l;
    }
}

/// Half-bandwidth of `a` (max |i - j| over stored entries).
pub fn bandwidth(a: &CsrMatrix) -> usize {
    (0..a.nrows()).flat_map(|i| a.row(i).0.iter().map(move |&j| i.abs_diff(j))).max().unwrap_or(0)
}
