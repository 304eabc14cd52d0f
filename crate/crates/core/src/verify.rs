//! Property battery behind `trajdist verify`: metric axioms on an exhaustive family of
//! tiny instances, the counterexample constructions, and matrix-norm conditions.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::comp::{d_comp_matrices, CompParams, NormKind};
use crate::counterexamples::{maxcount_sequences, maxcount_triangle, motp_crossing};
use crate::error::{Error, Result};
use crate::exact::{self, clear_mot_association, d_nat_matrices, ospa_matrices, swi_dist, DEFAULT_ENUMERATION_CAP};
use crate::matrix::SquareMatrix;
use crate::permutation::{Permutation, PermutationSequence};
use crate::switch_cost::{axiom_samples, check_k_axioms, Cost, SwitchCost, SwitchCostKind};
use crate::trajectory::{pair_distances, DistanceMatrixSequence, ExtendedMetricParams, Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Axioms,
    Counterexamples,
    Norm,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Counterexamples => "counterexamples",
            Suite::Norm => "norm",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Suite::Axioms, Suite::Counterexamples, Suite::Norm, Suite::All]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite '{s}'")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// A check documented to fail did fail.
    ExpectedFail,
    /// A check documented to fail passed.
    UnexpectedPass,
}

impl Status {
    fn from_outcome(holds: bool, expected_to_hold: bool) -> Self {
        match (holds, expected_to_hold) {
            (true, true) => Status::Pass,
            (false, true) => Status::Fail,
            (false, false) => Status::ExpectedFail,
            (true, false) => Status::UnexpectedPass,
        }
    }

    pub fn is_ok(self) -> bool {
        matches!(self, Status::Pass | Status::ExpectedFail)
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ExpectedFail => "XFAIL",
            Status::UnexpectedPass => "XPASS",
        }
    }
}

/// Ordered key/value witness values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Witness(pub Vec<(String, String)>);

impl Witness {
    fn num(mut self, key: &str, v: f64) -> Self {
        self.0.push((key.to_string(), format!("{v}")));
        self
    }

    fn text(mut self, key: &str, v: impl fmt::Display) -> Self {
        self.0.push((key.to_string(), v.to_string()));
        self
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub status: Status,
    pub witness: Witness,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<5} {}/{} {}", self.status.label(), self.suite, self.name, self.witness)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status.is_ok())
    }

    pub fn get(&self, suite: &str, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.suite == suite && c.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Miss penalty for the axiom universe.
    pub miss_penalty: f64,
    pub alphas: Vec<f64>,
    /// Solver settings for the convex metric in the axiom suite; `None` skips it.
    pub comp: Option<CompParams>,
    pub norm_samples: usize,
    pub max_norm_dim: usize,
    /// Random pairs per switch-cost axiom check when exhaustive enumeration is too large.
    pub k_axiom_samples: usize,
    pub crossing_thr: f64,
    pub crossing_horizon: usize,
    pub crossing_m: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            miss_penalty: 1.5,
            alphas: vec![0.5, 1.0, 2.0],
            comp: Some(CompParams::default()),
            norm_samples: 10_000,
            max_norm_dim: 5,
            k_axiom_samples: 20_000,
            crossing_thr: 1.5,
            crossing_horizon: 100,
            crossing_m: 2,
        }
    }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    if matches!(suite, Suite::Axioms | Suite::All) {
        report.checks.extend(axiom_suite(opts)?);
    }
    if matches!(suite, Suite::Counterexamples | Suite::All) {
        report.checks.extend(counterexample_suite(opts)?);
    }
    if matches!(suite, Suite::Norm | Suite::All) {
        report.checks.extend(norm_suite(opts)?);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Axioms

/// Grid of 1-D states used by the exhaustive universe.
pub const UNIVERSE_GRID: [i32; 5] = [-2, -1, 0, 1, 2];
pub const UNIVERSE_FRAMES: usize = 3;

/// Every set of at most one trajectory over frames `1..=3` with states on the integer
/// grid `{-2..2}`, gaps allowed: the empty set plus `6³ − 1` single-trajectory sets.
/// Any pair drawn from it has `m ≤ 2` after padding.
pub fn axiom_universe() -> Vec<TrajectorySet> {
    let choices = UNIVERSE_GRID.len() + 1;
    let mut out = vec![TrajectorySet::empty()];
    for code in 1..choices.pow(UNIVERSE_FRAMES as u32) {
        let mut c = code;
        let series: Vec<Option<f64>> = (0..UNIVERSE_FRAMES)
            .map(|_| {
                let digit = c % choices;
                c /= choices;
                (digit > 0).then(|| f64::from(UNIVERSE_GRID[digit - 1]))
            })
            .collect();
        let tr = Trajectory::from_series(&series).expect("nonempty series");
        out.push(TrajectorySet::new(vec![tr]).expect("single trajectory"));
    }
    out
}

fn describe(set: &TrajectorySet) -> String {
    let tracks: Vec<String> = set
        .trajectories()
        .iter()
        .map(|tr| {
            let pts: Vec<String> = tr.points().iter().map(|(t, x)| format!("{t}:{}", x[0])).collect();
            format!("[{}]", pts.join(","))
        })
        .collect();
    format!("{{{}}}", tracks.join(","))
}

/// Result of checking the four metric axioms on a full pairwise value table.
#[derive(Debug, Clone, Default)]
pub struct AxiomTally {
    pub pairs: usize,
    pub triples: usize,
    pub nonnegativity: usize,
    pub coincidence: usize,
    pub symmetry: usize,
    pub triangle: usize,
    /// Largest `d(i,k) − d(i,j) − d(j,k)` seen and its triple.
    pub worst_triangle: (f64, [usize; 3]),
    pub first_violation: Option<String>,
}

impl AxiomTally {
    pub fn violations(&self) -> usize {
        self.nonnegativity + self.coincidence + self.symmetry + self.triangle
    }
}

/// Checks nonnegativity, coincidence, symmetry and the triangle inequality on the
/// `n×n` table `v` (row-major, `v[i*n+j] = d(set i, set j)`). Sets are assumed
/// pairwise distinct. `slack(values)` gives the allowed error for a relation among
/// the listed values.
pub fn tally_axioms(n: usize, v: &[f64], slack: impl Fn(&[f64]) -> f64 + Sync) -> AxiomTally {
    let at = |i: usize, j: usize| v[i * n + j];
    let mut t = AxiomTally { pairs: n * n, triples: n * n * n, worst_triangle: (f64::NEG_INFINITY, [0; 3]), ..Default::default() };
    let note = |t: &mut AxiomTally, msg: String| {
        if t.first_violation.is_none() {
            t.first_violation = Some(msg);
        }
    };
    for i in 0..n {
        for j in 0..n {
            let d = at(i, j);
            if d < -slack(&[d]) {
                t.nonnegativity += 1;
                note(&mut t, format!("d({i},{j})={d} < 0"));
            }
            let zero = d.abs() <= slack(&[d]);
            if zero != (i == j) {
                t.coincidence += 1;
                note(&mut t, format!("d({i},{j})={d}"));
            }
            let e = at(j, i);
            if (d - e).abs() > slack(&[d, e]) {
                t.symmetry += 1;
                note(&mut t, format!("d({i},{j})={d} d({j},{i})={e}"));
            }
        }
    }
    let rows: Vec<(usize, f64, [usize; 3], Option<String>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut count = 0;
            let mut worst = (f64::NEG_INFINITY, [0; 3]);
            let mut first = None;
            for j in 0..n {
                let dij = at(i, j);
                for k in 0..n {
                    let (djk, dik) = (at(j, k), at(i, k));
                    let excess = dik - dij - djk;
                    if excess > worst.0 {
                        worst = (excess, [i, j, k]);
                    }
                    if excess > slack(&[dik, dij, djk]) {
                        count += 1;
                        first.get_or_insert_with(|| format!("d({i},{k})={dik} > d({i},{j})={dij} + d({j},{k})={djk}"));
                    }
                }
            }
            (count, worst.0, worst.1, first)
        })
        .collect();
    for (count, excess, triple, first) in rows {
        t.triangle += count;
        if excess > t.worst_triangle.0 {
            t.worst_triangle = (excess, triple);
        }
        if let Some(msg) = first {
            note(&mut t, msg);
        }
    }
    t
}

/// Exact arithmetic slack for metrics computed without iteration.
pub fn exact_slack(values: &[f64]) -> f64 {
    1e-9 * values.iter().map(|v| v.abs()).sum::<f64>().max(1.0)
}

/// Slack for the convex metric: `2·tol·Σ values`, never below round-off.
pub fn comp_slack(tol: f64) -> impl Fn(&[f64]) -> f64 + Sync {
    move |values: &[f64]| {
        let sum: f64 = values.iter().map(|v| v.abs()).sum();
        (2.0 * tol * sum).max(1e-9)
    }
}

/// Values of one metric on every ordered pair of `sets`.
pub fn pairwise_table<F>(dmats: &[DistanceMatrixSequence], f: F) -> Result<Vec<f64>>
where
    F: Fn(&DistanceMatrixSequence) -> Result<f64> + Sync,
{
    dmats.par_iter().map(&f).collect()
}

/// Distance matrices for every ordered pair of `sets`, row-major.
pub fn pairwise_distances(sets: &[TrajectorySet], params: &ExtendedMetricParams) -> Result<Vec<DistanceMatrixSequence>> {
    let n = sets.len();
    (0..n * n).into_par_iter().map(|idx| pair_distances(&sets[idx / n], &sets[idx % n], params)).collect()
}

fn tally_check(name: String, sets: &[TrajectorySet], tally: &AxiomTally) -> Check {
    let [i, j, k] = tally.worst_triangle.1;
    let mut w = Witness::default()
        .num("pairs", tally.pairs as f64)
        .num("triples", tally.triples as f64)
        .num("nonnegativity", tally.nonnegativity as f64)
        .num("coincidence", tally.coincidence as f64)
        .num("symmetry", tally.symmetry as f64)
        .num("triangle", tally.triangle as f64)
        .num("worst_triangle_excess", tally.worst_triangle.0)
        .text("worst_triple", format!("{} {} {}", describe(&sets[i]), describe(&sets[j]), describe(&sets[k])));
    if let Some(msg) = &tally.first_violation {
        w = w.text("first_violation", msg);
    }
    Check { suite: "axioms", name, status: Status::from_outcome(tally.violations() == 0, true), witness: w }
}

fn axiom_suite(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let sets = axiom_universe();
    let n = sets.len();
    let params = ExtendedMetricParams::euclidean(opts.miss_penalty)?;
    let dmats = pairwise_distances(&sets, &params)?;
    let mut checks = Vec::new();

    let v = pairwise_table(&dmats, |d| Ok(ospa_matrices(d).value))?;
    checks.push(tally_check("ospa".into(), &sets, &tally_axioms(n, &v, exact_slack)));

    for kind in [SwitchCostKind::Count, SwitchCostKind::Trans, SwitchCostKind::Adjtrans] {
        for &alpha in &opts.alphas {
            let k = SwitchCost::new(kind, alpha)?;
            let v = pairwise_table(&dmats, |d| Ok(d_nat_matrices(d, &k, DEFAULT_ENUMERATION_CAP)?.value))?;
            checks.push(tally_check(format!("dnat-{}-alpha{alpha}", kind.name()), &sets, &tally_axioms(n, &v, exact_slack)));
        }
    }

    if let Some(cp) = &opts.comp {
        for &alpha in &opts.alphas {
            let cp = CompParams { alpha, ..cp.clone() };
            let v = pairwise_table(&dmats, |d| Ok(d_comp_matrices(d, &cp)?.value))?;
            let tally = tally_axioms(n, &v, comp_slack(cp.tol));
            checks.push(tally_check(format!("dcomp-{}-alpha{alpha}", cp.norm.name()), &sets, &tally));
        }
    }

    checks.extend(switch_cost_axiom_checks(opts)?);
    Ok(checks)
}

/// Switch-cost properties (zero iff constant, inverse invariance, subadditivity) for
/// each cost on small permutation spaces. The adjacent-transposition count is not
/// invariant under relabeling, so it is only expected to pass for two objects.
fn switch_cost_axiom_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (m, t_horizon) in [(2, 3), (3, 2), (3, 3), (4, 3)] {
        let samples = axiom_samples(m, t_horizon, opts.k_axiom_samples, opts.seed);
        for kind in [SwitchCostKind::Count, SwitchCostKind::Trans, SwitchCostKind::Adjtrans] {
            let k = SwitchCost::new(kind, 1.0)?;
            let report = check_k_axioms(&k, &samples)?;
            let expected = kind != SwitchCostKind::Adjtrans || m <= 2;
            let mut w = Witness::default()
                .num("m", m as f64)
                .num("T", t_horizon as f64)
                .num("pairs", report.pairs_checked as f64)
                .num("violations", report.violations.len() as f64);
            if let Some(v) = report.violations.first() {
                w = w.text("first_violation", v);
            }
            checks.push(Check {
                suite: "axioms",
                name: format!("K-{}-m{m}-T{t_horizon}", kind.name()),
                status: Status::from_outcome(report.passed(), expected),
                witness: w,
            });
        }
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// Counterexamples

fn counterexample_suite(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let (thr, t_horizon, m) = (opts.crossing_thr, opts.crossing_horizon, opts.crossing_m);
    let cs = motp_crossing(thr, t_horizon, m)?;
    let t = t_horizon as f64;
    let pairs = cs.pairs as f64;
    let s = cs.scale;
    let mut checks = Vec::new();

    let ab = exact::motp(&cs.a, &cs.b, thr, &cs.params)?.value;
    let ac = exact::motp(&cs.a, &cs.c, thr, &cs.params)?.value;
    let cb = exact::motp(&cs.c, &cs.b, thr, &cs.params)?.value;
    // Bounds per crossing pair, in units of the construction scale.
    let holds = ab / t > 2.0 * (t - 12.0) / t * s * pairs
        && ac / t < 8.5 / t * s * pairs
        && cb / t < 8.5 / t * s * pairs
        && ab > ac + cb;
    checks.push(Check {
        suite: "counterexamples",
        name: "motp-triangle".into(),
        status: Status::from_outcome(holds, true),
        witness: Witness::default()
            .num("thr", thr)
            .num("T", t)
            .num("m", m as f64)
            .num("motp_ab", ab)
            .num("motp_ac", ac)
            .num("motp_cb", cb)
            .num("excess", ab - ac - cb),
    });

    let d = pair_distances(&cs.a, &cs.b, &cs.params)?;
    let (sigma_mot, _) = clear_mot_association(&d, thr)?;
    let mot = swi_dist(&sigma_mot, &d)?;
    let constant = PermutationSequence::constant(Permutation::identity(d.m()), d.t_horizon())?;
    let fixed = swi_dist(&constant, &d)?;
    let holds = sigma_mot.switch_count() == cs.pairs
        && mot.dist > 2.0 * (1.0 - 12.0 / t) * s * pairs
        && fixed.swi == 0.0
        && fixed.dist < 12.0 * 7.5 / t * s * pairs;
    checks.push(Check {
        suite: "counterexamples",
        name: "motp-switch".into(),
        status: Status::from_outcome(holds, true),
        witness: Witness::default()
            .num("thr", thr)
            .num("T", t)
            .num("m", m as f64)
            .num("swi_mot", mot.swi)
            .num("dist_mot", mot.dist)
            .num("swi_constant", fixed.swi)
            .num("dist_constant", fixed.dist),
    });

    let (sigma, sigma_prime) = maxcount_sequences();
    let k = SwitchCost::maxcount(1.0, 1)?;
    let composed = sigma_prime.compose(&sigma)?;
    let (ks, ksp, kc) = (k.eval(&sigma), k.eval(&sigma_prime), k.eval(&composed));
    let holds = ks == Cost::Finite(1.0) && ksp == Cost::Finite(1.0) && kc == Cost::Infinite;
    checks.push(Check {
        suite: "counterexamples",
        name: "maxcount-composition".into(),
        status: Status::from_outcome(holds, true),
        witness: Witness::default()
            .text("sigma", &sigma)
            .text("sigma_prime", &sigma_prime)
            .text("K_sigma", ks)
            .text("K_sigma_prime", ksp)
            .text("K_composed", kc),
    });

    let (a, b, c, params) = maxcount_triangle();
    let dn = |x: &TrajectorySet, y: &TrajectorySet| exact::d_nat_bruteforce(x, y, &k, &params).map(|r| r.value);
    let (vab, vbc, vac) = (dn(&a, &b)?, dn(&b, &c)?, dn(&a, &c)?);
    let holds = vab == 1.0 && vbc == 1.0 && vac >= 4.0;
    checks.push(Check {
        suite: "counterexamples",
        name: "maxcount-triangle".into(),
        status: Status::from_outcome(holds, true),
        witness: Witness::default().num("d_ab", vab).num("d_bc", vbc).num("d_ac", vac),
    });
    Ok(checks)
}

// ---------------------------------------------------------------------------
// Norm conditions

/// A random doubly stochastic matrix: a convex combination of up to `m²` random
/// permutation matrices with exponential weights.
pub fn random_doubly_stochastic<R: Rng>(m: usize, rng: &mut R) -> SquareMatrix {
    let terms = rng.random_range(1..=m * m);
    let weights: Vec<f64> = (0..terms).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut out = SquareMatrix::zeros(m);
    let mut perm: Vec<usize> = (0..m).collect();
    for w in weights {
        perm.shuffle(rng);
        for (i, &j) in perm.iter().enumerate() {
            out[(i, j)] += w / total;
        }
    }
    out
}

/// Largest violations of `‖Y₂X₂ − Y₁X₁‖ ≤ ‖Y₂ − Y₁‖ + ‖X₂ − X₁‖` and `‖W‖ ≤ 1` over
/// random doubly stochastic matrices of size `1..=max_dim`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NormTally {
    pub samples: usize,
    pub product_violations: usize,
    pub worst_product_excess: f64,
    pub unit_violations: usize,
    pub worst_unit_norm: f64,
}

pub fn norm_tally(norm: NormKind, samples: usize, max_dim: usize, seed: u64) -> NormTally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = NormTally { samples, worst_product_excess: f64::NEG_INFINITY, ..Default::default() };
    for _ in 0..samples {
        let m = rng.random_range(1..=max_dim.max(1));
        let [x1, x2, y1, y2] = std::array::from_fn(|_| random_doubly_stochastic(m, &mut rng));
        let lhs = norm.eval(&y2.matmul(&x2).sub(&y1.matmul(&x1)));
        let rhs = norm.eval(&y2.sub(&y1)) + norm.eval(&x2.sub(&x1));
        let excess = lhs - rhs;
        t.worst_product_excess = t.worst_product_excess.max(excess);
        if excess > 1e-12 * rhs.max(1.0) {
            t.product_violations += 1;
        }
        let unit = norm.eval(&x1);
        t.worst_unit_norm = t.worst_unit_norm.max(unit);
        if unit > 1.0 + 1e-12 {
            t.unit_violations += 1;
        }
    }
    t
}

fn norm_suite(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (norm, unit_expected) in [(NormKind::ColumnSum, true), (NormKind::Entrywise, false)] {
        let t = norm_tally(norm, opts.norm_samples, opts.max_norm_dim, opts.seed);
        let base = Witness::default().num("samples", t.samples as f64).num("max_dim", opts.max_norm_dim as f64);
        if norm == NormKind::ColumnSum {
            checks.push(Check {
                suite: "norm",
                name: format!("{}-product", norm.name()),
                status: Status::from_outcome(t.product_violations == 0, true),
                witness: base
                    .clone()
                    .num("violations", t.product_violations as f64)
                    .num("worst_excess", t.worst_product_excess),
            });
        }
        checks.push(Check {
            suite: "norm",
            name: format!("{}-unit-bound", norm.name()),
            status: Status::from_outcome(t.unit_violations == 0, unit_expected),
            witness: base.num("violations", t.unit_violations as f64).num("max_norm", t.worst_unit_norm),
        });
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universe_has_expected_size_and_distinct_sets() {
        let u = axiom_universe();
        assert_eq!(u.len(), 216);
        for i in 0..u.len() {
            for j in 0..i {
                assert!(!u[i].set_eq(&u[j]));
            }
        }
    }

    #[test]
    fn tally_detects_each_axiom() {
        // Three points on a line give a metric.
        let ok = [0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0];
        assert_eq!(tally_axioms(3, &ok, exact_slack).violations(), 0);
        let mut bad = ok;
        bad[2] = 3.0;
        let t = tally_axioms(3, &bad, exact_slack);
        assert_eq!(t.symmetry, 2);
        assert!(t.triangle > 0);
        let mut zero = ok;
        zero[1] = 0.0;
        zero[3] = 0.0;
        assert_eq!(tally_axioms(3, &zero, exact_slack).coincidence, 2);
    }

    #[test]
    fn random_matrices_are_doubly_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 1..=5 {
            let w = random_doubly_stochastic(m, &mut rng);
            assert!(w.doubly_stochastic_residual() < 1e-12);
            assert!(w.as_slice().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn counterexamples_reproduce() {
        let checks = counterexample_suite(&VerifyOptions::default()).unwrap();
        assert_eq!(checks.len(), 4);
        for c in &checks {
            assert_eq!(c.status, Status::Pass, "{c}");
        }
    }

    #[test]
    fn norm_suite_statuses() {
        let opts = VerifyOptions { norm_samples: 500, ..Default::default() };
        let report = run(Suite::Norm, &opts).unwrap();
        assert_eq!(report.get("norm", "colsum-product").unwrap().status, Status::Pass);
        assert_eq!(report.get("norm", "colsum-unit-bound").unwrap().status, Status::Pass);
        assert_eq!(report.get("norm", "entrywise-unit-bound").unwrap().status, Status::ExpectedFail);
        assert!(report.passed());
    }

    #[test]
    fn suite_names_parse() {
        for s in ["axioms", "counterexamples", "norm", "all"] {
            assert_eq!(s.parse::<Suite>().unwrap().name(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }
}
