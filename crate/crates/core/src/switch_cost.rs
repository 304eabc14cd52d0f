//! Switch-cost functionals `K` on permutation sequences and an axiom checker.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::{Permutation, PermutationSequence};

/// Extended nonnegative cost; `Infinite` absorbs additions and compares above every finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cost {
    Finite(f64),
    Infinite,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    /// `f64::INFINITY` for `Infinite`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Add<f64> for Cost {
    type Output = Cost;
    fn add(self, rhs: f64) -> Cost {
        self + Cost::Finite(rhs)
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Cost) -> Option<Ordering> {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.partial_cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Some(Ordering::Less),
            (Cost::Infinite, Cost::Finite(_)) => Some(Ordering::Greater),
            (Cost::Infinite, Cost::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchCostKind {
    /// `α · #{t : σ(t+1) ≠ σ(t)}`
    Count,
    /// `α · Σ_t k_Cayley(σ(t+1) ∘ σ(t)⁻¹)`
    Trans,
    /// `α · Σ_t k_Kendall(σ(t+1) ∘ σ(t)⁻¹)`
    Adjtrans,
    /// 0 for constant sequences, +∞ otherwise.
    Ospa,
    /// The `Count` value when it is at most `β`, +∞ otherwise.
    Maxcount,
}

impl SwitchCostKind {
    pub const ALL: [SwitchCostKind; 5] = [
        SwitchCostKind::Count,
        SwitchCostKind::Trans,
        SwitchCostKind::Adjtrans,
        SwitchCostKind::Ospa,
        SwitchCostKind::Maxcount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SwitchCostKind::Count => "count",
            SwitchCostKind::Trans => "trans",
            SwitchCostKind::Adjtrans => "adjtrans",
            SwitchCostKind::Ospa => "ospa",
            SwitchCostKind::Maxcount => "maxcount",
        }
    }
}

impl FromStr for SwitchCostKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown switch cost '{s}' (expected count, trans, adjtrans, ospa or maxcount)")))
    }
}

impl fmt::Display for SwitchCostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchCost {
    kind: SwitchCostKind,
    alpha: f64,
    beta: u32,
}

impl SwitchCost {
    pub fn new(kind: SwitchCostKind, alpha: f64) -> Result<Self> {
        if kind == SwitchCostKind::Maxcount {
            return Err(Error::invalid("maxcount needs a budget; use SwitchCost::maxcount"));
        }
        Self::validated(kind, alpha, 0)
    }

    pub fn maxcount(alpha: f64, beta: u32) -> Result<Self> {
        if beta < 1 {
            return Err(Error::invalid("maxcount budget beta must be at least 1"));
        }
        Self::validated(SwitchCostKind::Maxcount, alpha, beta)
    }

    fn validated(kind: SwitchCostKind, alpha: f64, beta: u32) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(format!("switch weight alpha must be positive and finite, got {alpha}")));
        }
        Ok(Self { kind, alpha, beta })
    }

    pub fn count(alpha: f64) -> Result<Self> {
        Self::new(SwitchCostKind::Count, alpha)
    }

    pub fn kind(&self) -> SwitchCostKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    /// Unweighted cost of moving from `prev` to `next` for the additive kinds
    /// (`Count`/`Maxcount` count one per change, `Ospa` reports the change as 1).
    pub fn step_units(&self, prev: &Permutation, next: &Permutation) -> usize {
        match self.kind {
            SwitchCostKind::Count | SwitchCostKind::Maxcount | SwitchCostKind::Ospa => usize::from(prev != next),
            SwitchCostKind::Trans | SwitchCostKind::Adjtrans => {
                if prev == next {
                    return 0;
                }
                let rel = next.compose(&prev.inverse()).expect("sequence frames share a size");
                if self.kind == SwitchCostKind::Trans {
                    rel.cayley_distance()
                } else {
                    rel.kendall_distance()
                }
            }
        }
    }

    /// `K(Σ)`.
    pub fn eval(&self, seq: &PermutationSequence) -> Cost {
        let frames = seq.frames();
        let units: usize = frames.windows(2).map(|w| self.step_units(&w[0], &w[1])).sum();
        self.from_units(units)
    }

    /// Converts a total of step units into the cost value.
    pub fn from_units(&self, units: usize) -> Cost {
        let weighted = self.alpha * units as f64;
        match self.kind {
            SwitchCostKind::Ospa => {
                if units == 0 {
                    Cost::ZERO
                } else {
                    Cost::Infinite
                }
            }
            SwitchCostKind::Maxcount if weighted > f64::from(self.beta) => Cost::Infinite,
            _ => Cost::Finite(weighted),
        }
    }
}

impl fmt::Display for SwitchCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SwitchCostKind::Maxcount => write!(f, "maxcount(alpha={}, beta={})", self.alpha, self.beta),
            kind => write!(f, "{kind}(alpha={})", self.alpha),
        }
    }
}

/// Convenience wrapper for [`SwitchCost::eval`].
pub fn switch_cost(k: &SwitchCost, seq: &PermutationSequence) -> Cost {
    k.eval(seq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// `K(Σ) = 0` iff `Σ` is constant.
    ZeroIffConstant,
    /// `K(Σ⁻¹) = K(Σ)`.
    InverseInvariance,
    /// `K(Σ ∘ Σ') ≤ K(Σ) + K(Σ')`.
    SubadditiveLeft,
    /// `K(Σ' ∘ Σ) ≤ K(Σ) + K(Σ')`.
    SubadditiveRight,
}

#[derive(Debug, Clone)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub sigma: PermutationSequence,
    pub sigma_prime: Option<PermutationSequence>,
    pub lhs: Cost,
    pub rhs: Cost,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: Σ={}", self.axiom, self.sigma)?;
        if let Some(sp) = &self.sigma_prime {
            write!(f, " Σ'={sp}")?;
        }
        write!(f, " lhs={} rhs={}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, Default)]
pub struct AxiomReport {
    pub pairs_checked: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}

fn leq(lhs: Cost, rhs: Cost) -> bool {
    match (lhs, rhs) {
        (Cost::Finite(a), Cost::Finite(b)) => a <= b + 1e-12 * b.abs().max(1.0),
        (_, Cost::Infinite) => true,
        (Cost::Infinite, Cost::Finite(_)) => false,
    }
}

/// Evaluates the three switch-cost axioms on every sample pair and collects violating witnesses.
/// Properties (i) and (ii) are checked on both members of every pair.
pub fn check_k_axioms(k: &SwitchCost, samples: &[(PermutationSequence, PermutationSequence)]) -> Result<AxiomReport> {
    let mut report = AxiomReport::default();
    let mut seen_single = std::collections::HashSet::new();
    for (s, sp) in samples {
        for seq in [s, sp] {
            if !seen_single.insert(seq.clone()) {
                continue;
            }
            let c = k.eval(seq);
            if (c == Cost::ZERO) != seq.is_constant() {
                report.violations.push(AxiomViolation {
                    axiom: Axiom::ZeroIffConstant,
                    sigma: seq.clone(),
                    sigma_prime: None,
                    lhs: c,
                    rhs: Cost::ZERO,
                });
            }
            let ci = k.eval(&seq.inverse());
            if !(leq(ci, c) && leq(c, ci)) {
                report.violations.push(AxiomViolation {
                    axiom: Axiom::InverseInvariance,
                    sigma: seq.clone(),
                    sigma_prime: None,
                    lhs: ci,
                    rhs: c,
                });
            }
        }
        let rhs = k.eval(s) + k.eval(sp);
        for (axiom, composed) in [(Axiom::SubadditiveLeft, s.compose(sp)?), (Axiom::SubadditiveRight, sp.compose(s)?)] {
            let lhs = k.eval(&composed);
            if !leq(lhs, rhs) {
                report.violations.push(AxiomViolation {
                    axiom,
                    sigma: s.clone(),
                    sigma_prime: Some(sp.clone()),
                    lhs,
                    rhs,
                });
            }
        }
        report.pairs_checked += 1;
    }
    Ok(report)
}

/// Pair count at or below which [`axiom_samples`] enumerates exhaustively.
pub const EXHAUSTIVE_PAIR_LIMIT: f64 = 1e5;

/// All sequences in `Π^T` in lexicographic order.
pub fn all_sequences(m: usize, t_horizon: usize) -> Vec<PermutationSequence> {
    let perms = Permutation::all(m);
    let mut out = vec![Vec::new()];
    for _ in 0..t_horizon {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Permutation>| {
                perms.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.push(p.clone());
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(|v| PermutationSequence::new(v).expect("uniform sizes")).collect()
}

/// Sample pairs for [`check_k_axioms`]: every pair of `Π^T` when that is at most
/// [`EXHAUSTIVE_PAIR_LIMIT`] pairs, otherwise `n_random` seeded random pairs.
pub fn axiom_samples(m: usize, t_horizon: usize, n_random: usize, seed: u64) -> Vec<(PermutationSequence, PermutationSequence)> {
    let factorial: f64 = (1..=m).map(|i| i as f64).product();
    let n_seq = factorial.powi(t_horizon as i32);
    if n_seq * n_seq <= EXHAUSTIVE_PAIR_LIMIT {
        let all = all_sequences(m, t_horizon);
        return all.iter().flat_map(|a| all.iter().map(move |b| (a.clone(), b.clone()))).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_seq = |rng: &mut ChaCha8Rng| {
        let frames = (0..t_horizon)
            .map(|_| {
                let mut v: Vec<usize> = (0..m).collect();
                v.shuffle(rng);
                Permutation::new(v).expect("shuffled identity")
            })
            .collect();
        PermutationSequence::new(frames).expect("uniform sizes")
    };
    (0..n_random).map(|_| (random_seq(&mut rng), random_seq(&mut rng))).collect()
}
