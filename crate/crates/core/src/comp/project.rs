//! Projections, norm proximal maps and feasibility repair used by the solvers.

use super::NormKind;
use crate::assignment;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::trajectory::DistanceMatrixSequence;

/// Euclidean projection of `v` onto the probability simplex, in place.
/// `scratch` must have at least `v.len()` entries.
pub(crate) fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    if n == 0 {
        return;
    }
    // Michelot's iteration: the threshold increases monotonically to its fixed point and
    // each pass drops the entries below it.
    let mut theta = (v.iter().sum::<f64>() - 1.0) / n as f64;
    loop {
        let (mut sum, mut count) = (0.0, 0usize);
        for &x in v.iter() {
            if x > theta {
                sum += x;
                count += 1;
            }
        }
        let next = (sum - 1.0) / count as f64;
        if next <= theta {
            break;
        }
        theta = next;
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Projection onto the simplex restricted to entries with `allowed[k]`; the rest become 0.
pub(crate) fn project_simplex_masked(v: &mut [f64], allowed: &[bool], buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(v.iter().zip(allowed).filter(|(_, &a)| a).map(|(x, _)| *x));
    project_simplex(buf);
    let mut it = buf.iter();
    for (x, &a) in v.iter_mut().zip(allowed) {
        *x = if a { *it.next().expect("one value per allowed entry") } else { 0.0 };
    }
}

/// Soft thresholding, the proximal map of `λ Σ|x|`.
pub(crate) fn soft_threshold(v: &mut [f64], lambda: f64) {
    for x in v.iter_mut() {
        *x = x.signum() * (x.abs() - lambda).max(0.0);
    }
}

/// Threshold `θ` with `Σ_i max(a_i − θ, 0) = s` for `a` sorted descending with
/// prefix sums `prefix` (`prefix[k] = a_0 + ... + a_k`); 0 when `Σ a ≤ s`.
fn l1_threshold(a: &[f64], prefix: &[f64], s: f64) -> (f64, usize) {
    let n = a.len();
    if prefix[n - 1] <= s {
        return (0.0, 0);
    }
    // Largest k with a_k > (prefix_k − s) / (k + 1); the predicate is monotone in k.
    let (mut lo, mut hi) = (0usize, n - 1);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if a[mid] * (mid + 1) as f64 > prefix[mid] - s {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    (((prefix[lo] - s) / (lo + 1) as f64).max(0.0), lo + 1)
}

/// Proximal map of `λ · max_j Σ_i |X_ij|` on a row-major `m×m` block, in place.
///
/// The result clips every column `j` by a level `μ_j` so that all clipped columns share
/// the same 1-norm `s` and `Σ_j μ_j = λ`.
pub(crate) fn prox_colsum(v: &mut [f64], m: usize, lambda: f64, work: &mut ColsumWork) {
    if lambda <= 0.0 || m == 0 {
        return;
    }
    // The result vanishes when λ reaches the dual norm; that needs no sorting.
    let mut dual = 0.0;
    for j in 0..m {
        dual += (0..m).fold(0.0f64, |a, i| a.max(v[i * m + j].abs()));
    }
    if lambda >= dual {
        v.fill(0.0);
        return;
    }
    let ColsumWork { sorted, prefix, theta } = work;
    sorted.resize(m * m, 0.0);
    prefix.resize(m * m, 0.0);
    theta.resize(m, 0.0);
    let mut max_sum = 0.0;
    let mut hi = 0.0f64;
    for j in 0..m {
        let col = &mut sorted[j * m..(j + 1) * m];
        for i in 0..m {
            col[i] = v[i * m + j].abs();
        }
        col.sort_unstable_by(|a, b| b.total_cmp(a));
        let pre = &mut prefix[j * m..(j + 1) * m];
        let mut c = 0.0;
        for i in 0..m {
            c += col[i];
            pre[i] = c;
        }
        max_sum += col[0];
        hi = hi.max(c);
    }
    if lambda >= max_sum {
        v.fill(0.0);
        return;
    }
    // Σ_j θ_j(s) is convex, decreasing and piecewise linear in s, so Newton steps from
    // s = 0 stay left of the root and stop on its linear piece after finitely many steps.
    let mut s = 0.0;
    for _ in 0..100 {
        let (mut g, mut slope) = (0.0, 0.0);
        for j in 0..m {
            let (th, k) = l1_threshold(&sorted[j * m..(j + 1) * m], &prefix[j * m..(j + 1) * m], s);
            if th > 0.0 {
                g += th;
                slope += 1.0 / k as f64;
            }
        }
        let excess = g - lambda;
        if excess <= 1e-14 * lambda || slope == 0.0 {
            break;
        }
        s = (s + excess / slope).min(hi);
    }
    for j in 0..m {
        theta[j] = l1_threshold(&sorted[j * m..(j + 1) * m], &prefix[j * m..(j + 1) * m], s).0;
    }
    for i in 0..m {
        for j in 0..m {
            let x = &mut v[i * m + j];
            *x = x.signum() * (x.abs() - theta[j]).max(0.0);
        }
    }
}

#[derive(Debug, Default, Clone)]
pub(crate) struct ColsumWork {
    sorted: Vec<f64>,
    prefix: Vec<f64>,
    theta: Vec<f64>,
}

/// Proximal map of `λ‖·‖` for either norm.
pub(crate) fn prox_norm(norm: NormKind, v: &mut [f64], m: usize, lambda: f64, work: &mut ColsumWork) {
    match norm {
        NormKind::Entrywise => soft_threshold(v, lambda),
        NormKind::ColumnSum => prox_colsum(v, m, lambda, work),
    }
}

/// Dual norm of `y`: `Σ_j max_i |y_ij|` for the column-sum norm, `max |y_ij|` for the entrywise norm.
pub(crate) fn dual_norm(norm: NormKind, y: &[f64], m: usize) -> f64 {
    match norm {
        NormKind::Entrywise => y.iter().fold(0.0, |a, v| a.max(v.abs())),
        NormKind::ColumnSum => {
            let mut cols = vec![0.0f64; m];
            for row in y.chunks_exact(m) {
                for (c, v) in cols.iter_mut().zip(row) {
                    *c = c.max(v.abs());
                }
            }
            cols.iter().sum()
        }
    }
}

/// Makes a nonnegative row-major `m×m` block exactly doubly stochastic: rows and then
/// columns with excess mass are scaled down, and the deficit is added back as a
/// rank-one correction. Negative entries are clipped first.
pub fn round_to_doubly_stochastic(x: &mut [f64], m: usize) {
    for v in x.iter_mut() {
        *v = v.max(0.0);
    }
    for row in x.chunks_exact_mut(m) {
        let s: f64 = row.iter().sum();
        if s > 1.0 {
            row.iter_mut().for_each(|v| *v /= s);
        }
    }
    let mut col = vec![0.0; m];
    for row in x.chunks_exact(m) {
        col.iter_mut().zip(row).for_each(|(c, v)| *c += v);
    }
    for row in x.chunks_exact_mut(m) {
        for (v, &c) in row.iter_mut().zip(&col) {
            if c > 1.0 {
                *v /= c;
            }
        }
    }
    let err_r: Vec<f64> = x.chunks_exact(m).map(|row| (1.0 - row.iter().sum::<f64>()).max(0.0)).collect();
    let mut err_c = vec![1.0; m];
    for row in x.chunks_exact(m) {
        err_c.iter_mut().zip(row).for_each(|(c, v)| *c -= v);
    }
    err_c.iter_mut().for_each(|c| *c = c.max(0.0));
    let total: f64 = err_r.iter().sum();
    if total > 0.0 {
        for (row, &er) in x.chunks_exact_mut(m).zip(&err_r) {
            if er > 0.0 {
                for (v, &ec) in row.iter_mut().zip(&err_c) {
                    *v += er * ec / total;
                }
            }
        }
    }
}

/// Alternating row and column normalization restricted to a support; used when a zero
/// pattern is imposed. The support must have total support (see [`feasible_mask`]).
pub(crate) fn sinkhorn_masked(x: &mut [f64], mask: &[bool], m: usize, tol: f64, max_iter: usize) -> f64 {
    let floor = 1e-12;
    for (v, &a) in x.iter_mut().zip(mask) {
        *v = if a { v.max(floor) } else { 0.0 };
    }
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut col = vec![0.0; m];
        for row in x.chunks_exact(m) {
            col.iter_mut().zip(row).for_each(|(c, v)| *c += v);
        }
        for row in x.chunks_exact_mut(m) {
            row.iter_mut().zip(&col).for_each(|(v, &c)| *v /= c);
        }
        residual = 0.0;
        for row in x.chunks_exact_mut(m) {
            let s: f64 = row.iter().sum();
            residual = f64::max(residual, (s - 1.0).abs());
            row.iter_mut().for_each(|v| *v /= s);
        }
        if residual <= tol {
            break;
        }
    }
    residual
}

/// Support allowed by a sparsification threshold: `D(t)_ij ≤ threshold`, reduced to the
/// entries that lie on some perfect matching of the pattern (every other entry is zero in
/// all doubly stochastic matrices with that support). If a frame's pattern has no perfect
/// matching it is either repaired by adding the support of that frame's minimum-cost
/// assignment or reported as infeasible.
pub fn feasible_mask(d: &DistanceMatrixSequence, threshold: f64, repair: bool) -> Result<Vec<bool>> {
    let m = d.m();
    let mut mask = Vec::with_capacity(d.t_horizon() * m * m);
    for (t, dt) in d.frames().iter().enumerate() {
        let mut allowed: Vec<bool> = dt.as_slice().iter().map(|&v| v <= threshold).collect();
        let blocked = SquareMatrix::from_fn(m, |i, j| if allowed[i * m + j] { 0.0 } else { 1.0 });
        let mut matching = assignment::solve_any(&blocked);
        if matching.cost > 0.0 {
            if !repair {
                return Err(Error::InfeasiblePattern { frame: t + 1 });
            }
            matching = assignment::solve(dt);
            for (i, &j) in matching.mapping.iter().enumerate() {
                allowed[i * m + j] = true;
            }
        }
        restrict_to_total_support(&mut allowed, &matching.mapping, m);
        mask.extend(allowed);
    }
    Ok(mask)
}

/// Keeps an allowed entry `(i, j)` only if it lies on an alternating cycle with respect to
/// the perfect matching, i.e. row `i` and column `j` share a strongly connected component
/// of the graph with edges row→column (allowed, unmatched) and column→row (matched).
fn restrict_to_total_support(allowed: &mut [bool], matching: &[usize], m: usize) {
    let n = 2 * m;
    let mut owner = vec![0; m];
    for (i, &j) in matching.iter().enumerate() {
        owner[j] = i;
    }
    // Nodes 0..m are rows, m..2m columns.
    let succ = |u: usize| -> Vec<usize> {
        if u < m {
            (0..m).filter(|&j| allowed[u * m + j] && matching[u] != j).map(|j| m + j).collect()
        } else {
            vec![owner[u - m]]
        }
    };
    let adj: Vec<Vec<usize>> = (0..n).map(succ).collect();
    let comp = strongly_connected_components(&adj);
    for i in 0..m {
        for j in 0..m {
            let k = i * m + j;
            if allowed[k] && matching[i] != j && comp[i] != comp[m + j] {
                allowed[k] = false;
            }
        }
    }
}

/// Kosaraju's algorithm with explicit stacks; returns a component id per node.
fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (u, idx) = *top;
            if let Some(&v) = adj[u].get(idx) {
                top.1 += 1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
                stack.pop();
            }
        }
    }
    let mut radj = vec![Vec::new(); n];
    for (u, vs) in adj.iter().enumerate() {
        for &v in vs {
            radj[v].push(u);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = c;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &radj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = c;
                    stack.push(v);
                }
            }
        }
        c += 1;
    }
    comp
}
