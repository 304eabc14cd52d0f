mod common;

use approx::assert_abs_diff_eq;
use common::*;
use trajdist_core::comp::tradeoff::default_alpha_grid;
use trajdist_core::exact::{clear_mot_association, d_nat_matrices};
use trajdist_core::{
    d_comp, d_nat_bruteforce, motp, ospa, pair_distances, tradeoff_curve, Backend, CompParams, ExtendedMetricParams, NormKind,
    PermutationSequence, SwitchCost,
};

fn params(m: f64) -> ExtendedMetricParams {
    ExtendedMetricParams::euclidean(m).unwrap()
}

#[test]
fn single_trajectories() {
    let (a, b) = scenario1();
    assert_abs_diff_eq!(ospa(&a, &b, &params(0.1)).unwrap().value, 0.36, epsilon = 1e-9);
    let (a, b) = scenario2();
    assert_abs_diff_eq!(ospa(&a, &b, &params(0.1)).unwrap().value, 0.3, epsilon = 1e-9);
}

#[test]
fn two_trajectories_pick_the_cheaper_pairing() {
    let (a, b) = scenario3();
    let r = ospa(&a, &b, &params(10.0)).unwrap();
    assert_abs_diff_eq!(r.value, 1.68, epsilon = 1e-9);
    let sigma = r.association.sigma().unwrap();
    assert_eq!(&sigma.get(0).to_one_based()[..2], &[2, 1]);
    let d = pair_distances(&a, &b, &params(10.0)).unwrap();
    let identity = PermutationSequence::constant(trajdist_core::Permutation::identity(4), 6).unwrap();
    assert_abs_diff_eq!(d.assignment_cost(identity.mappings()), 6.40, epsilon = 1e-9);
}

#[test]
fn crossing_objects_under_each_metric() {
    let (a, b, c) = scenario4();
    let p = params(10.0);
    for (x, y) in [(&a, &b), (&a, &c), (&b, &c)] {
        assert_abs_diff_eq!(ospa(x, y, &p).unwrap().value, 7.2, epsilon = 1e-9);
    }
    assert_abs_diff_eq!(motp(&a, &b, 0.19, &p).unwrap().value, 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(motp(&a, &c, 0.19, &p).unwrap().value, 7.2, epsilon = 1e-9);
    assert_abs_diff_eq!(motp(&b, &c, 0.19, &p).unwrap().value, 7.2, epsilon = 1e-9);

    let d = pair_distances(&a, &b, &p).unwrap();
    let (sigma, _) = clear_mot_association(&d, 0.19).unwrap();
    let frames: Vec<Vec<usize>> = sigma.frames().iter().map(|s| s.to_one_based()[..2].to_vec()).collect();
    let expected = [[1, 2], [1, 2], [1, 2], [2, 1], [2, 1], [2, 1]];
    assert_eq!(frames, expected.map(|f| f.to_vec()));
}

#[test]
fn one_switch_is_cheaper_than_the_distance() {
    let (a, b, _) = scenario4();
    let p = params(10.0);
    // Padding gives m = 4, so the search space is (4!)^6; branch and bound keeps it fast.
    let d = pair_distances(&a, &b, &p).unwrap();
    let r = d_nat_matrices(&d, &SwitchCost::count(0.1).unwrap(), 1e9).unwrap();
    assert_abs_diff_eq!(r.value, 0.1, epsilon = 1e-9);
    assert_abs_diff_eq!(r.dist_term, 0.0, epsilon = 1e-9);
    assert_eq!(r.association.sigma().unwrap().switch_count(), 1);

    for (norm, per_switch) in [(NormKind::ColumnSum, 2.0), (NormKind::Entrywise, 4.0)] {
        let cp = CompParams { alpha: 0.1, norm, backend: Backend::Simplex, ..Default::default() };
        let r = d_comp(&a, &b, &p, &cp).unwrap();
        assert_abs_diff_eq!(r.value, 0.1 * per_switch, epsilon = 1e-9);
        let admm = d_comp(&a, &b, &p, &CompParams { backend: Backend::Admm, ..cp }).unwrap();
        assert!(admm.converged);
        assert!((admm.value - r.value).abs() <= 0.01 * r.value + 1e-12, "{} vs {}", admm.value, r.value);
    }
}

#[test]
fn curve_endpoints_match_exact_metrics() {
    let (a, b, _) = scenario4();
    let p = params(10.0);
    let d = pair_distances(&a, &b, &p).unwrap();
    let alphas = default_alpha_grid(&d);
    let curve = tradeoff_curve(&a, &b, &p, &alphas, &CompParams::default()).unwrap();
    assert!(curve.hull_is_valid(1e-9));
    let smallest = &curve.points[0];
    assert!(smallest.dist < 0.05, "{smallest:?}");
    assert_abs_diff_eq!(smallest.swi, 2.0, epsilon = 0.05);
    let largest = curve.points.last().unwrap();
    assert_abs_diff_eq!(largest.swi, 0.0, epsilon = 1e-6);
    assert_abs_diff_eq!(largest.dist, ospa(&a, &b, &p).unwrap().value, epsilon = 0.01 * 7.2);
}

#[test]
fn identical_sets_are_at_distance_zero() {
    let (a, _, _) = scenario4();
    let p = params(10.0);
    assert_eq!(ospa(&a, &a, &p).unwrap().value, 0.0);
    assert_eq!(motp(&a, &a, 0.5, &p).unwrap().value, 0.0);
    let d = pair_distances(&a, &a, &p).unwrap();
    assert_eq!(d_nat_matrices(&d, &SwitchCost::count(1.0).unwrap(), 1e9).unwrap().value, 0.0);
    let (x, _) = scenario1();
    assert_eq!(d_nat_bruteforce(&x, &x, &SwitchCost::count(1.0).unwrap(), &p).unwrap().value, 0.0);
    assert!(d_comp(&a, &a, &p, &CompParams::default()).unwrap().value.abs() < 1e-12);
    let curve = tradeoff_curve(&a, &a, &p, &[0.1, 1.0, 10.0], &CompParams::default()).unwrap();
    assert!(curve.points.iter().all(|pt| pt.dist.abs() < 1e-12 && pt.swi.abs() < 1e-12));
}
