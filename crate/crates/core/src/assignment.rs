//! Square linear assignment via the shortest-augmenting-path Hungarian method.

use crate::matrix::SquareMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Row `i` is assigned to column `mapping[i]`.
    pub mapping: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost assignment; among all optimal assignments returns the
/// lexicographically smallest mapping (up to a tightness tolerance on reduced costs).
pub fn solve(cost: &SquareMatrix) -> Assignment {
    let (mut mapping, u, v) = hungarian(cost);
    lex_refine(cost, &mut mapping, &u, &v);
    finish(cost, mapping)
}

/// Minimum-cost assignment without tie refinement.
pub fn solve_any(cost: &SquareMatrix) -> Assignment {
    let (mapping, _, _) = hungarian(cost);
    finish(cost, mapping)
}

/// Maximum-weight assignment (lexicographically smallest among optima).
pub fn solve_max(weight: &SquareMatrix) -> Assignment {
    let neg = SquareMatrix::from_fn(weight.dim(), |i, j| -weight[(i, j)]);
    let mut a = solve(&neg);
    a.cost = -a.cost;
    a
}

fn finish(cost: &SquareMatrix, mapping: Vec<usize>) -> Assignment {
    let total = mapping.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
    Assignment { mapping, cost: total }
}

/// Returns the row-to-column mapping with row and column potentials `u`, `v`
/// satisfying `c_ij - u_i - v_j >= 0` with equality on the matching.
fn hungarian(cost: &SquareMatrix) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.dim();
    // 1-based arrays; index 0 is the virtual column used to start each augmentation.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let row = cost.row(i0 - 1);
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
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
            for j in 0..=n {
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
    let mut mapping = vec![0; n];
    for j in 1..=n {
        mapping[p[j] - 1] = j - 1;
    }
    (mapping, u[1..].to_vec(), v[1..].to_vec())
}

/// Moves to the lexicographically smallest perfect matching of the tight-edge graph.
/// Every perfect matching of that graph is optimal because the potentials are dual optimal.
fn lex_refine(cost: &SquareMatrix, mapping: &mut [usize], u: &[f64], v: &[f64]) {
    let n = mapping.len();
    if n < 2 {
        return;
    }
    let scale = cost.as_slice().iter().fold(1.0f64, |a, &c| a.max(c.abs()));
    let eps = 1e-9 * scale;
    let tight = |i: usize, j: usize| cost[(i, j)] - u[i] - v[j] <= eps;
    let mut owner = vec![0; n];
    for (i, &j) in mapping.iter().enumerate() {
        owner[j] = i;
    }
    let mut visited = vec![false; n];
    for i in 0..n {
        for j in 0..mapping[i] {
            if !tight(i, j) || owner[j] < i {
                continue;
            }
            // Free column mapping[i] and try to rematch owner[j] using rows > i.
            let target = mapping[i];
            visited.fill(false);
            visited[j] = true;
            let r = owner[j];
            if let Some(path) = augment(r, target, i, mapping, &tight, &mut visited) {
                for (row, col) in path {
                    mapping[row] = col;
                    owner[col] = row;
                }
                mapping[i] = j;
                owner[j] = i;
                break;
            }
        }
    }
}

/// Alternating path from row `r` to column `target` through rows greater than `fixed`.
/// Returns the (row, new column) reassignments.
fn augment(
    r: usize,
    target: usize,
    fixed: usize,
    mapping: &[usize],
    tight: &impl Fn(usize, usize) -> bool,
    visited: &mut [bool],
) -> Option<Vec<(usize, usize)>> {
    let n = mapping.len();
    if tight(r, target) {
        return Some(vec![(r, target)]);
    }
    for col in 0..n {
        if visited[col] || col == mapping[r] || !tight(r, col) {
            continue;
        }
        visited[col] = true;
        let next = match mapping.iter().position(|&c| c == col) {
            Some(row) if row > fixed && row != r => row,
            _ => continue,
        };
        if let Some(mut path) = augment(next, target, fixed, mapping, tight, visited) {
            path.push((r, col));
            return Some(path);
        }
    }
    None
}
