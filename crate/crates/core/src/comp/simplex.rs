//! Dense two-phase primal simplex, adequate for the small exact instances.

use super::lp::{LinearProgram, Sense};
use crate::error::{Error, Result};

const EPS: f64 = 1e-9;
/// Consecutive degenerate pivots after which Bland's rule takes over.
const DEGENERATE_SWITCH: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs; the last entry holds minus the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in &mut self.rows[r] {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            self.obj.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
        }
        self.basis[r] = c;
    }

    /// Minimizes over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let mut degenerate = 0;
        loop {
            let bland = degenerate >= DEGENERATE_SWITCH;
            let entering = if bland {
                (0..allowed).find(|&j| self.obj[j] < -EPS)
            } else {
                (0..allowed)
                    .filter(|&j| self.obj[j] < -EPS)
                    .min_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]))
            };
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((k, best)) => ratio < best - EPS || (ratio <= best + EPS && self.basis[i] < self.basis[k]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else { return false };
            degenerate = if ratio.abs() <= EPS { degenerate + 1 } else { 0 };
            self.pivot(r, c);
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.n_vars;
    let mut rows_spec: Vec<(Vec<(usize, f64)>, Sense, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let sense = match c.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (c.coeffs.iter().map(|&(j, a)| (j, -a)).collect(), sense, -c.rhs)
            } else {
                (c.coeffs.clone(), c.sense, c.rhs)
            }
        })
        .collect();
    let n_slack = rows_spec.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows_spec.iter().filter(|r| r.1 != Sense::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut rows = Vec::with_capacity(rows_spec.len());
    let mut basis = Vec::with_capacity(rows_spec.len());
    let (mut next_slack, mut next_art) = (n, art_start);
    for (coeffs, sense, rhs) in rows_spec.drain(..) {
        let mut row = vec![0.0; width + 1];
        for (j, a) in coeffs {
            row[j] += a;
        }
        row[width] = rhs;
        match sense {
            Sense::Le => {
                row[next_slack] = 1.0;
                basis.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
    }

    // Phase 1: minimize the sum of artificials.
    let mut obj = vec![0.0; width + 1];
    for (row, &b) in rows.iter().zip(&basis) {
        if b >= art_start {
            obj.iter_mut().zip(row).for_each(|(o, v)| *o -= v);
        }
    }
    (art_start..width).for_each(|j| obj[j] = 0.0);
    let mut tab = Tableau { rows, obj, basis, width };
    if !tab.optimize(width) {
        return Err(Error::Lp("unbounded in phase one"));
    }
    let infeasibility = -tab.obj[width];
    let scale = 1.0 + lp.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    if infeasibility > 1e-7 * scale {
        return Err(Error::Lp("infeasible"));
    }

    // Drive remaining artificials out of the basis; rows where that is impossible are redundant.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= art_start {
            match (0..art_start).find(|&j| tab.rows[i][j].abs() > EPS) {
                Some(c) => tab.pivot(i, c),
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2 on the original objective, artificials excluded.
    let mut obj = vec![0.0; width + 1];
    obj[..n].copy_from_slice(&lp.objective);
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        let cb = if b < n { lp.objective[b] } else { 0.0 };
        if cb != 0.0 {
            obj.iter_mut().zip(row).for_each(|(o, v)| *o -= cb * v);
        }
    }
    tab.obj = obj;
    if !tab.optimize(art_start) {
        return Err(Error::Lp("unbounded"));
    }
    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(i);
        }
    }
    let objective = lp.evaluate(&x);
    Ok(LpSolution { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  x=2, y=6, value 36.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![-3.0, -5.0];
        lp.add(vec![(0, 1.0)], Sense::Le, 4.0);
        lp.add(vec![(1, 2.0)], Sense::Le, 12.0);
        lp.add(vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
        let s = solve(&lp).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 3, x ≥ 1, y ≥ 0.5  →  x=2.5, y=0.5.
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, 2.0];
        lp.add(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 3.0);
        lp.add(vec![(0, 1.0)], Sense::Ge, 1.0);
        lp.add(vec![(1, 1.0)], Sense::Ge, 0.5);
        let s = solve(&lp).unwrap();
        assert!((s.objective - 3.5).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        // Row and column sums of a 2x2 matrix: one equality is implied by the others.
        let mut lp = LinearProgram::new(4);
        lp.objective = vec![1.0, 0.0, 0.0, 1.0];
        lp.add(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0);
        lp.add(vec![(2, 1.0), (3, 1.0)], Sense::Eq, 1.0);
        lp.add(vec![(0, 1.0), (2, 1.0)], Sense::Eq, 1.0);
        lp.add(vec![(1, 1.0), (3, 1.0)], Sense::Eq, 1.0);
        let s = solve(&lp).unwrap();
        assert!(s.objective.abs() < 1e-12);
        assert!(lp.violation(&s.x) < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add(vec![(0, 1.0)], Sense::Le, -1.0);
        assert!(matches!(solve(&lp), Err(Error::Lp("infeasible"))));
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![-1.0];
        assert!(matches!(solve(&lp), Err(Error::Lp("unbounded"))));
    }
}
