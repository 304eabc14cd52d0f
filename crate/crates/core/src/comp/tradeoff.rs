//! Trade-off curves between the distance term and the unweighted switch term, their
//! lower-left convex hull, and the normalized area under that hull.

use rayon::prelude::*;
use serde::Serialize;

use super::{admm_solve_from, d_comp_matrices, max_distance, max_switch, AdmmState, Backend, CompParams, NormKind};
use crate::error::{Error, Result};
use crate::exact::clear_mot_association;
use crate::result::MetricResult;
use crate::trajectory::{pair_distances, DistanceMatrixSequence, ExtendedMetricParams, TrajectorySet};

/// One solved point. `param` is the switch weight `α` for the convex metric and the
/// threshold `thr` for the CLEAR MOT curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub param: f64,
    pub dist: f64,
    pub swi: f64,
    pub converged: bool,
    /// Set when the solve for this parameter failed; `dist` and `swi` are then NaN.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffCurve {
    pub points: Vec<TradeoffPoint>,
    /// Vertices of the lower-left convex hull as `(dist, swi)`, by increasing `dist`.
    pub hull: Vec<(f64, f64)>,
}

impl TradeoffCurve {
    pub fn from_points(points: Vec<TradeoffPoint>) -> Self {
        let pairs: Vec<(f64, f64)> = points.iter().filter(|p| p.error.is_none()).map(|p| (p.dist, p.swi)).collect();
        let hull = lower_left_hull(&pairs);
        Self { points, hull }
    }

    /// Whether point `i` lies on the hull (within `eps` of a hull segment).
    pub fn on_hull(&self, i: usize, eps: f64) -> bool {
        let p = &self.points[i];
        if p.error.is_some() {
            return false;
        }
        if self.hull.len() == 1 {
            let (x, y) = self.hull[0];
            return (p.dist - x).abs() <= eps && (p.swi - y).abs() <= eps;
        }
        self.hull.windows(2).any(|s| {
            let ((x0, y0), (x1, y1)) = (s[0], s[1]);
            if p.dist < x0 - eps || p.dist > x1 + eps {
                return false;
            }
            let u = ((p.dist - x0) / (x1 - x0)).clamp(0.0, 1.0);
            (p.swi - (y0 + u * (y1 - y0))).abs() <= eps
        })
    }

    /// True when the hull is convex and `swi` is non-increasing in `dist`, up to `eps`.
    pub fn hull_is_valid(&self, eps: f64) -> bool {
        hull_is_valid(&self.hull, eps)
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Lower-left convex hull: the convex, decreasing part of the lower hull, from the
/// point of least `dist` to the first point of least `swi`.
pub fn lower_left_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    sorted.dedup();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in sorted {
        if hull.last().is_some_and(|h| h.0 == p.0) {
            continue;
        }
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    if let Some(first_min) = hull
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
    {
        hull.truncate(first_min + 1);
    }
    hull
}

pub fn hull_is_valid(hull: &[(f64, f64)], eps: f64) -> bool {
    let decreasing = hull.windows(2).all(|s| s[1].0 >= s[0].0 - eps && s[1].1 <= s[0].1 + eps);
    let convex = hull.windows(3).all(|s| cross(s[0], s[1], s[2]) >= -eps);
    decreasing && convex
}

/// Area under the hull inside `[0, max_dist] × [0, max_swi]`, divided by the box area.
/// Left of the hull the curve is taken at `max_swi`, right of it at its last `swi`.
pub fn auc(curve: &TradeoffCurve, max_dist: f64, max_swi: f64) -> Result<f64> {
    auc_of_hull(&curve.hull, max_dist, max_swi)
}

pub fn auc_of_hull(hull: &[(f64, f64)], max_dist: f64, max_swi: f64) -> Result<f64> {
    if hull.is_empty() {
        return Err(Error::invalid("trade-off curve has no valid points"));
    }
    if !(max_dist > 0.0 && max_swi > 0.0) {
        return Err(Error::invalid("normalization bounds must be positive"));
    }
    let (x_first, _) = hull[0];
    let (_, y_last) = hull[hull.len() - 1];
    let mut poly = vec![(0.0, max_swi), (x_first.max(0.0), max_swi)];
    poly.extend_from_slice(hull);
    poly.push((max_dist.max(hull[hull.len() - 1].0), y_last));

    let mut area = 0.0;
    for s in poly.windows(2) {
        let ((xa, ya), (xb, yb)) = (s[0], s[1]);
        let (lo, hi) = (xa.max(0.0), xb.min(max_dist));
        if hi <= lo {
            continue;
        }
        let at = |x: f64| if xb > xa { ya + (yb - ya) * (x - xa) / (xb - xa) } else { ya.min(yb) };
        area += capped_integral(lo, at(lo), hi, at(hi), max_swi);
    }
    Ok((area / (max_dist * max_swi)).clamp(0.0, 1.0))
}

/// `∫ clamp(y, 0, cap)` over a linear segment from `(x0, y0)` to `(x1, y1)`.
fn capped_integral(x0: f64, y0: f64, x1: f64, y1: f64, cap: f64) -> f64 {
    let w = x1 - x0;
    let mut breaks = vec![0.0, 1.0];
    for level in [0.0, cap] {
        if (y0 - level) * (y1 - level) < 0.0 {
            breaks.push((level - y0) / (y1 - y0));
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks
        .windows(2)
        .map(|u| {
            let ya = (y0 + (y1 - y0) * u[0]).clamp(0.0, cap);
            let yb = (y0 + (y1 - y0) * u[1]).clamp(0.0, cap);
            0.5 * (ya + yb) * w * (u[1] - u[0])
        })
        .sum()
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

/// Twenty switch weights spanning `[1e-3·ρ, 1e3·ρ]`, `ρ = Σ_t mean(D(t)) / (2(T−1))`.
pub fn default_alpha_grid(d: &DistanceMatrixSequence) -> Vec<f64> {
    let mean_sum: f64 = d
        .frames()
        .iter()
        .map(|f| f.as_slice().iter().sum::<f64>() / f.as_slice().len().max(1) as f64)
        .sum();
    let rho = mean_sum / (2.0 * d.t_horizon().saturating_sub(1).max(1) as f64);
    let rho = if rho > 0.0 && rho.is_finite() { rho } else { 1.0 };
    log_grid(1e-3 * rho, 1e3 * rho, 20)
}

/// Twenty-five thresholds spanning `[1e-3·M, 2.5·M]`; beyond `2M` every pair stays anchored.
pub fn default_threshold_grid(miss_penalty: f64) -> Vec<f64> {
    log_grid(1e-3 * miss_penalty, 2.5 * miss_penalty, 25)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("parameter grid is empty"));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("parameter grid values must be nonnegative and finite"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("parameter grid must be sorted ascending"));
    }
    Ok(())
}

pub fn tradeoff_curve(
    a: &TrajectorySet,
    b: &TrajectorySet,
    params: &ExtendedMetricParams,
    alphas: &[f64],
    cp: &CompParams,
) -> Result<TradeoffCurve> {
    tradeoff_curve_matrices(&pair_distances(a, b, params)?, alphas, cp)
}

/// Solves the convex problem once per `α`; `cp.alpha` is ignored. With the ADMM backend
/// the grid is walked in order and each solve starts from the previous one's iterates.
pub fn tradeoff_curve_matrices(d: &DistanceMatrixSequence, alphas: &[f64], cp: &CompParams) -> Result<TradeoffCurve> {
    check_grid(alphas)?;
    let point = |alpha: f64, r: Result<MetricResult>| match r {
        Ok(r) => TradeoffPoint { param: alpha, dist: r.dist_term, swi: r.raw_switch, converged: r.converged, error: None },
        Err(e) => TradeoffPoint { param: alpha, dist: f64::NAN, swi: f64::NAN, converged: false, error: Some(e.to_string()) },
    };
    let points = match cp.backend {
        Backend::Admm if d.m() > 0 && d.t_horizon() > 0 => {
            let mut warm: Option<AdmmState> = None;
            alphas
                .iter()
                .map(|&alpha| {
                    let solved = admm_solve_from(d, &CompParams { alpha, ..cp.clone() }, warm.as_ref()).map(|(out, state)| {
                        warm = Some(state);
                        out.result
                    });
                    point(alpha, solved)
                })
                .collect()
        }
        _ => alphas.par_iter().map(|&alpha| point(alpha, d_comp_matrices(d, &CompParams { alpha, ..cp.clone() }))).collect(),
    };
    Ok(TradeoffCurve::from_points(points))
}

/// CLEAR MOT curve: for each threshold, the distance accumulated along the CLEAR MOT
/// association and the switch term of its permutation matrices in `norm`.
pub fn motp_curve_matrices(d: &DistanceMatrixSequence, thresholds: &[f64], norm: NormKind) -> Result<TradeoffCurve> {
    check_grid(thresholds)?;
    let points = thresholds
        .par_iter()
        .map(|&thr| {
            let (sigma, _) = clear_mot_association(d, thr)?;
            let dist = d.assignment_cost(sigma.mappings());
            let per_switch = |p: &[usize], q: &[usize]| {
                let moved = p.iter().zip(q).filter(|(a, b)| a != b).count() as f64;
                match norm {
                    NormKind::ColumnSum if moved > 0.0 => 2.0,
                    NormKind::ColumnSum => 0.0,
                    NormKind::Entrywise => 2.0 * moved,
                }
            };
            let swi = sigma.frames().windows(2).map(|w| per_switch(w[0].as_slice(), w[1].as_slice())).sum();
            Ok(TradeoffPoint { param: thr, dist, swi, converged: true, error: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve::from_points(points))
}

/// Normalization bounds `(max_dist, max_swi)` for [`auc`]. Either may be zero for
/// degenerate inputs, in which case the AUC is defined as zero.
pub fn auc_bounds(d: &DistanceMatrixSequence, norm: NormKind) -> (f64, f64) {
    (max_distance(d), max_switch(d, norm))
}

/// [`auc`] with the bounds of `d`, returning 0 when a bound vanishes (a single frame or
/// no trajectories leaves nothing to trade off).
pub fn normalized_auc(curve: &TradeoffCurve, d: &DistanceMatrixSequence, norm: NormKind) -> Result<f64> {
    let (max_dist, max_swi) = auc_bounds(d, norm);
    if max_dist <= 0.0 || max_swi <= 0.0 {
        return if curve.hull.is_empty() { Err(Error::invalid("trade-off curve has no valid points")) } else { Ok(0.0) };
    }
    auc(curve, max_dist, max_swi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(dist: f64, swi: f64) -> TradeoffPoint {
        TradeoffPoint { param: 0.0, dist, swi, converged: true, error: None }
    }

    #[test]
    fn hull_drops_dominated_and_concave_points() {
        let pts = [(0.0, 4.0), (1.0, 1.0), (2.0, 3.0), (3.0, 0.5), (4.0, 0.0), (5.0, 0.0), (1.0, 2.0), (2.5, 2.0)];
        let hull = lower_left_hull(&pts);
        assert_eq!(hull, vec![(0.0, 4.0), (1.0, 1.0), (4.0, 0.0)]);
        assert!(hull_is_valid(&hull, 0.0));
    }

    #[test]
    fn hull_of_single_point() {
        assert_eq!(lower_left_hull(&[(1.0, 1.0), (1.0, 1.0)]), vec![(1.0, 1.0)]);
        assert_eq!(lower_left_hull(&[(0.0, 0.0), (1.0, 1.0)]), vec![(0.0, 0.0)]);
    }

    #[test]
    fn auc_extremes() {
        let zero = TradeoffCurve::from_points(vec![pt(0.0, 0.0)]);
        assert_eq!(auc(&zero, 3.0, 2.0).unwrap(), 0.0);
        let full = TradeoffCurve::from_points(vec![pt(3.0, 2.0)]);
        assert!((auc(&full, 3.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let empty = TradeoffCurve::from_points(vec![]);
        assert!(auc(&empty, 1.0, 1.0).is_err());
        assert!(auc(&zero, 0.0, 1.0).is_err());
    }

    #[test]
    fn auc_of_a_diagonal() {
        // Straight line from (0, 2) to (2, 0) in a 2×2 box: half the box.
        let c = TradeoffCurve::from_points(vec![pt(0.0, 2.0), pt(2.0, 0.0)]);
        assert!((auc(&c, 2.0, 2.0).unwrap() - 0.5).abs() < 1e-12);
        // Same line clipped to a box of height 1: 1 (flat part) + 0.5 (triangle) over 2.
        assert!((auc(&c, 2.0, 1.0).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn on_hull_flags() {
        let c = TradeoffCurve::from_points(vec![pt(0.0, 2.0), pt(1.0, 1.0), pt(2.0, 0.0), pt(1.0, 1.5)]);
        assert!(c.on_hull(0, 1e-9) && c.on_hull(1, 1e-9) && c.on_hull(2, 1e-9));
        assert!(!c.on_hull(3, 1e-9));
    }

    #[test]
    fn grid_validation() {
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[1.0, 0.5]).is_err());
        assert!(check_grid(&[0.0, 0.5]).is_ok());
        let g = log_grid(1e-3, 1e3, 7);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[6] - 1e3).abs() < 1e-9 && (g[3] - 1.0).abs() < 1e-12);
    }
}
