//! Permutations of `[m]` and sequences of them.
//!
//! Mappings are stored 0-based; `Display` and the `from_one_based` constructor
//! use the 1-based notation `(σ_1, ..., σ_m)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let m = mapping.len();
        let mut seen = vec![false; m];
        for &j in &mapping {
            if j >= m || seen[j] {
                return Err(Error::invalid(format!("{mapping:?} is not a permutation of 0..{m}")));
            }
            seen[j] = true;
        }
        Ok(Self { mapping })
    }

    pub fn from_one_based(mapping: &[usize]) -> Result<Self> {
        if mapping.contains(&0) {
            return Err(Error::invalid("1-based permutation contains 0"));
        }
        Self::new(mapping.iter().map(|j| j - 1).collect())
    }

    pub fn identity(m: usize) -> Self {
        Self { mapping: (0..m).collect() }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.mapping.iter().map(|j| j + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `(self ∘ other)_i = self_{other_i}`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch { left: self.len(), right: other.len() });
        }
        Ok(Self { mapping: other.mapping.iter().map(|&j| self.mapping[j]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.mapping.iter().enumerate() {
            inv[j] = i;
        }
        Self { mapping: inv }
    }

    pub fn cycle_count(&self) -> usize {
        let m = self.len();
        let mut seen = vec![false; m];
        let mut cycles = 0;
        for start in 0..m {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.mapping[i];
            }
        }
        cycles
    }

    /// Minimum number of transpositions whose product is `self`: `m - #cycles`.
    pub fn cayley_distance(&self) -> usize {
        self.len() - self.cycle_count()
    }

    /// Number of inversions, i.e. adjacent swaps bubble sort performs.
    pub fn kendall_distance(&self) -> usize {
        let mut buf = self.mapping.clone();
        let mut scratch = vec![0; buf.len()];
        count_inversions(&mut buf, &mut scratch)
    }

    /// Advances to the next permutation in lexicographic order; returns false
    /// (leaving `self` sorted ascending) after the last one.
    pub fn next_lex(&mut self) -> bool {
        let v = &mut self.mapping;
        let n = v.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            v.reverse();
            return false;
        }
        let mut j = n - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        true
    }

    /// All permutations of `[m]` in lexicographic order.
    pub fn all(m: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut p = Self::identity(m);
        loop {
            out.push(p.clone());
            if !p.next_lex() {
                break;
            }
        }
        out
    }
}

fn count_inversions(v: &mut [usize], scratch: &mut [usize]) -> usize {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left_scratch, right_scratch) = scratch.split_at_mut(mid);
    let mut inv = {
        let (l, r) = v.split_at_mut(mid);
        count_inversions(l, left_scratch) + count_inversions(r, right_scratch)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            scratch[k] = v[i];
            i += 1;
        } else {
            scratch[k] = v[j];
            inv += mid - i;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    inv
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.mapping
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, j) in self.mapping.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        write!(f, ")")
    }
}

/// `Σ = (σ(1), ..., σ(T))`, all of the same size.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationSequence {
    seq: Vec<Permutation>,
}

impl PermutationSequence {
    pub fn new(seq: Vec<Permutation>) -> Result<Self> {
        if seq.is_empty() {
            return Err(Error::invalid("a permutation sequence needs at least one frame"));
        }
        let m = seq[0].len();
        if let Some(p) = seq.iter().find(|p| p.len() != m) {
            return Err(Error::SizeMismatch { left: m, right: p.len() });
        }
        Ok(Self { seq })
    }

    pub fn from_one_based(seq: &[&[usize]]) -> Result<Self> {
        Self::new(seq.iter().map(|p| Permutation::from_one_based(p)).collect::<Result<_>>()?)
    }

    pub fn constant(p: Permutation, t_horizon: usize) -> Result<Self> {
        Self::new(vec![p; t_horizon])
    }

    pub fn m(&self) -> usize {
        self.seq[0].len()
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn frames(&self) -> &[Permutation] {
        &self.seq
    }

    pub fn get(&self, t: usize) -> &Permutation {
        &self.seq[t]
    }

    pub fn is_constant(&self) -> bool {
        self.seq.windows(2).all(|w| w[0] == w[1])
    }

    /// Frame-wise composition `(Σ ∘ Σ')(t) = σ(t) ∘ σ'(t)`.
    pub fn compose(&self, other: &PermutationSequence) -> Result<PermutationSequence> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch { left: self.len(), right: other.len() });
        }
        let seq = self.seq.iter().zip(&other.seq).map(|(a, b)| a.compose(b)).collect::<Result<_>>()?;
        Ok(Self { seq })
    }

    pub fn inverse(&self) -> PermutationSequence {
        Self { seq: self.seq.iter().map(Permutation::inverse).collect() }
    }

    /// Number of frames `t` with `σ(t+1) ≠ σ(t)`.
    pub fn switch_count(&self) -> usize {
        self.seq.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn mappings(&self) -> impl Iterator<Item = &[usize]> {
        self.seq.iter().map(Permutation::as_slice)
    }
}

impl fmt::Display for PermutationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.seq.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Permutation {
        Permutation::from_one_based(v).unwrap()
    }

    /// Inversions counted pairwise, independent of the merge-sort path.
    fn inversions_naive(s: &Permutation) -> usize {
        let v = s.as_slice();
        (0..v.len()).flat_map(|i| (i + 1..v.len()).map(move |j| (i, j))).filter(|&(i, j)| v[i] > v[j]).count()
    }

    /// Breadth-first distance to the identity using arbitrary transpositions.
    fn transpositions_bfs(s: &Permutation) -> usize {
        use std::collections::{HashSet, VecDeque};
        let m = s.len();
        let mut seen = HashSet::from([s.clone()]);
        let mut queue = VecDeque::from([(s.clone(), 0)]);
        while let Some((q, d)) = queue.pop_front() {
            if q.is_identity() {
                return d;
            }
            for a in 0..m {
                for b in a + 1..m {
                    let mut v = q.as_slice().to_vec();
                    v.swap(a, b);
                    let next = Permutation::new(v).unwrap();
                    if seen.insert(next.clone()) {
                        queue.push_back((next, d + 1));
                    }
                }
            }
        }
        unreachable!("identity is reachable")
    }

    #[test]
    fn compose_examples() {
        let id = Permutation::identity(2);
        assert_eq!(id.compose(&p(&[2, 1])).unwrap(), p(&[2, 1]));
        assert_eq!(p(&[2, 1]).compose(&p(&[2, 1])).unwrap(), id);
        assert_eq!(p(&[2, 3, 1]).compose(&p(&[3, 1, 2])).unwrap(), Permutation::identity(3));
        assert!(matches!(id.compose(&Permutation::identity(3)), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Permutation::identity(4).inverse(), Permutation::identity(4));
        assert_eq!(p(&[2, 1]).inverse(), p(&[2, 1]));
        assert_eq!(p(&[2, 3, 1]).inverse(), p(&[3, 1, 2]));
        for s in Permutation::all(4) {
            assert!(s.compose(&s.inverse()).unwrap().is_identity());
            assert!(s.inverse().compose(&s).unwrap().is_identity());
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(Permutation::identity(3).cayley_distance(), 0);
        assert_eq!(p(&[2, 1]).cayley_distance(), 1);
        assert_eq!(p(&[2, 3, 1]).cayley_distance(), 2);
        assert_eq!(Permutation::identity(3).kendall_distance(), 0);
        assert_eq!(p(&[2, 1]).kendall_distance(), 1);
        assert_eq!(p(&[3, 2, 1]).kendall_distance(), 3);
    }

    #[test]
    fn distances_match_oracles() {
        for m in 0..=5 {
            for s in Permutation::all(m) {
                assert_eq!(s.kendall_distance(), inversions_naive(&s), "{s}");
                assert_eq!(s.cayley_distance(), transpositions_bfs(&s), "{s}");
                assert!(s.cayley_distance() <= s.kendall_distance());
            }
        }
    }

    #[test]
    fn cayley_facts_exhaustive() {
        for m in 1..=4 {
            let all = Permutation::all(m);
            for s in &all {
                for t in &all {
                    let st = s.compose(t).unwrap();
                    assert!(st.cayley_distance() <= s.cayley_distance() + t.cayley_distance());
                    let conj = t.compose(s).unwrap().compose(&t.inverse()).unwrap();
                    assert_eq!(conj.cayley_distance(), s.cayley_distance());
                }
            }
        }
    }

    #[test]
    fn lex_enumeration_is_complete_and_ordered() {
        let all = Permutation::all(4);
        assert_eq!(all.len(), 24);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(Permutation::all(0).len(), 1);
        assert_eq!(Permutation::all(1).len(), 1);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
        assert!(PermutationSequence::new(vec![]).is_err());
        assert!(PermutationSequence::new(vec![Permutation::identity(2), Permutation::identity(3)]).is_err());
    }

    #[test]
    fn display_is_one_based() {
        let s = PermutationSequence::from_one_based(&[&[1, 2], &[2, 1]]).unwrap();
        assert_eq!(s.to_string(), "((1,2),(2,1))");
        assert_eq!(s.switch_count(), 1);
    }
}
