//! Exact bipartite matching: maximum-weight assignment (Hungarian method) and
//! maximum-cardinality matching (Hopcroft-Karp).

use std::collections::VecDeque;

/// Maximum-weight matching for a dense non-negative weight matrix
/// (`weights[row][col]`). Returns the column assigned to each row; pairs of
/// weight 0 are reported as unmatched.
pub fn max_weight_matching(weights: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    debug_assert!(weights.iter().all(|r| r.len() == cols));
    let assignment = if rows <= cols {
        hungarian(rows, cols, |i, j| weights[i][j])
    } else {
        let by_col = hungarian(cols, rows, |i, j| weights[j][i]);
        let mut out = vec![None; rows];
        for (c, r) in by_col.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        out
    };
    assignment.into_iter().enumerate().map(|(i, c)| c.filter(|&c| weights[i][c] > 0.0)).collect()
}

/// Shortest-augmenting-path Hungarian method on an `n x m` matrix, `n <= m`,
/// maximizing total weight. Every row receives a column.
fn hungarian(n: usize, m: usize, w: impl Fn(usize, usize) -> f64) -> Vec<Option<usize>> {
    const INF: f64 = f64::INFINITY;
    // potentials and matching are 1-indexed; column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = -w(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
        }
    }
    out
}

/// Maximum-cardinality matching. `adj[l]` lists right vertices adjacent to left
/// vertex `l`. Returns the partner of every left vertex.
pub fn max_cardinality_matching(right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    const NONE: usize = usize::MAX;
    let left = adj.len();
    let mut match_l = vec![NONE; left];
    let mut match_r = vec![NONE; right];
    let mut dist = vec![0usize; left];
    let mut it = vec![0usize; left];
    let mut queue = VecDeque::new();
    loop {
        // layer the free left vertices
        queue.clear();
        for l in 0..left {
            if match_l[l] == NONE {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = NONE;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let w = match_r[r];
                if w == NONE {
                    found = true;
                } else if dist[w] == NONE {
                    dist[w] = dist[l] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        it.iter_mut().for_each(|x| *x = 0);
        let mut stack: Vec<usize> = Vec::new();
        for root in 0..left {
            if match_l[root] != NONE {
                continue;
            }
            stack.clear();
            stack.push(root);
            while let Some(&l) = stack.last() {
                if it[l] < adj[l].len() {
                    let r = adj[l][it[l]];
                    it[l] += 1;
                    let w = match_r[r];
                    if w == NONE {
                        // flip the alternating path held on the stack
                        let top = stack.len() - 1;
                        for (k, &node) in stack.iter().enumerate() {
                            let rr = if k == top { r } else { adj[node][it[node] - 1] };
                            match_l[node] = rr;
                            match_r[rr] = node;
                        }
                        break;
                    } else if dist[w] != NONE && dist[w] == dist[l] + 1 {
                        stack.push(w);
                    }
                } else {
                    dist[l] = NONE;
                    stack.pop();
                }
            }
        }
    }
    match_l.into_iter().map(|r| (r != NONE).then_some(r)).collect()
}
