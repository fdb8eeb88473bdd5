//! Lexicographic enumeration of strictly increasing index sequences.
//!
//! Compound matrices are indexed by Q(k, n), the k-element subsets of
//! {1, ..., n} written in increasing order and enumerated lexicographically.
//! This module provides that enumeration together with ranking/unranking, so
//! compound entries can be addressed without materialising the whole list.

use crate::error::{Error, Result};

/// Default cap on the ambient dimension `n`. C(20, 10) = 184756 already gives
/// compound matrices far beyond desk scale; larger requests are almost always
/// mistakes, so the plain constructors refuse them. Use the `_with_cap`
/// variants to lift the limit deliberately.
pub const DEFAULT_DIM_CAP: usize = 20;

/// A strictly increasing sequence of k indices drawn from {1, ..., n}.
///
/// Indices are 1-based to match the usual minor notation A[alpha | beta].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    elems: Vec<usize>,
    n: usize,
}

impl IndexSet {
    /// Validates and wraps a sequence. `elems` must be non-empty, strictly
    /// increasing and contained in {1, ..., n}.
    pub fn new(elems: Vec<usize>, n: usize) -> Result<Self> {
        if elems.is_empty() {
            return Err(Error::domain("index sequence must be non-empty"));
        }
        if elems[0] == 0 || elems[elems.len() - 1] > n {
            return Err(Error::domain(format!(
                "index sequence {elems:?} not contained in 1..={n}"
            )));
        }
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "index sequence {elems:?} is not strictly increasing"
            )));
        }
        Ok(IndexSet { elems, n })
    }

    /// Sequence length k.
    pub fn k(&self) -> usize {
        self.elems.len()
    }

    /// Ambient dimension n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The 1-based indices in increasing order.
    pub fn elements(&self) -> &[usize] {
        &self.elems
    }

    /// The same indices shifted to 0-based, for direct use with
    /// [`crate::DenseMatrix::submatrix`].
    pub fn zero_based(&self) -> Vec<usize> {
        self.elems.iter().map(|&v| v - 1).collect()
    }

    /// True when `v` (1-based) occurs in the sequence.
    pub fn contains(&self, v: usize) -> bool {
        self.elems.binary_search(&v).is_ok()
    }

    /// Position of this sequence in the lexicographic enumeration of Q(k, n),
    /// starting at 0.
    pub fn rank(&self) -> usize {
        let k = self.k();
        let mut rank = 0usize;
        let mut prev = 0usize;
        for (l, &a) in self.elems.iter().enumerate() {
            for v in prev + 1..a {
                // Any sequence that agrees on the first l entries and then
                // picks v < a precedes this one; it has C(n - v, k - l - 1)
                // completions.
                rank += binomial(self.n - v, k - l - 1)
                    .expect("rank counts bounded by C(n, k), which was representable");
            }
            prev = a;
        }
        rank
    }
}

impl std::fmt::Display for IndexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.elems.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Binomial coefficient C(n, k) with overflow detection.
pub fn binomial(n: usize, k: usize) -> Result<usize> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::Overflow(format!("C({n},{k}) overflows")))?;
        acc /= (i + 1) as u128; // exact: product of i+1 consecutive integers
    }
    usize::try_from(acc).map_err(|_| Error::Overflow(format!("C({n},{k}) exceeds usize")))
}

/// All of Q(k, n) in lexicographic order, with the default dimension cap.
pub fn lex_sequences(k: usize, n: usize) -> Result<Vec<IndexSet>> {
    lex_sequences_with_cap(k, n, DEFAULT_DIM_CAP)
}

/// All of Q(k, n) in lexicographic order, with an explicit cap on `n`.
pub fn lex_sequences_with_cap(k: usize, n: usize, cap: usize) -> Result<Vec<IndexSet>> {
    check_order(k, n, cap)?;
    let count = binomial(n, k)?;
    let mut out = Vec::with_capacity(count);
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(IndexSet { elems: cur.clone(), n });
        // Advance to the lexicographic successor: bump the rightmost entry
        // that still has room, then reset everything after it.
        let mut advanced = false;
        for pos in (0..k).rev() {
            if cur[pos] < n - (k - 1 - pos) {
                cur[pos] += 1;
                for j in pos + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            debug_assert_eq!(out.len(), count);
            return Ok(out);
        }
    }
}

/// The sequence at position `rank` (0-based) in the lexicographic enumeration
/// of Q(k, n).
pub fn unrank(rank: usize, k: usize, n: usize) -> Result<IndexSet> {
    check_order(k, n, DEFAULT_DIM_CAP)?;
    let total = binomial(n, k)?;
    if rank >= total {
        return Err(Error::domain(format!(
            "rank {rank} out of range for Q({k},{n}) with {total} sequences"
        )));
    }
    let mut rest = rank;
    let mut elems = Vec::with_capacity(k);
    let mut prev = 0usize;
    for l in 0..k {
        let mut v = prev + 1;
        loop {
            let completions = binomial(n - v, k - l - 1)?;
            if rest < completions {
                elems.push(v);
                prev = v;
                break;
            }
            rest -= completions;
            v += 1;
        }
    }
    Ok(IndexSet { elems, n })
}

fn check_order(k: usize, n: usize, cap: usize) -> Result<()> {
    if k == 0 || n == 0 {
        return Err(Error::domain("k and n must be positive"));
    }
    if k > n {
        return Err(Error::domain(format!("k = {k} exceeds n = {n}")));
    }
    if n > cap {
        return Err(Error::domain(format!(
            "ambient dimension n = {n} exceeds the cap {cap}; use the _with_cap variant to lift it"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_2_3_enumerates_in_lex_order() {
        let seqs = lex_sequences(2, 3).unwrap();
        let as_vecs: Vec<Vec<usize>> = seqs.iter().map(|s| s.elements().to_vec()).collect();
        assert_eq!(as_vecs, vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn binomial_values_and_overflow() {
        assert_eq!(binomial(5, 2).unwrap(), 10);
        assert_eq!(binomial(6, 3).unwrap(), 20);
        assert_eq!(binomial(20, 10).unwrap(), 184_756);
        assert_eq!(binomial(3, 5).unwrap(), 0);
        assert_eq!(binomial(0, 0).unwrap(), 1);
        // C(1000, 500) is astronomically large; the checked product must fail
        // rather than wrap.
        assert!(matches!(binomial(1000, 500), Err(Error::Overflow(_))));
    }

    #[test]
    fn unrank_golden_values() {
        assert_eq!(unrank(0, 2, 3).unwrap().elements(), &[1, 2]);
        assert_eq!(unrank(2, 2, 3).unwrap().elements(), &[2, 3]);
        assert!(unrank(3, 2, 3).is_err());
    }

    #[test]
    fn rank_and_unrank_round_trip_exhaustively() {
        for &(k, n) in &[(2usize, 5usize), (3, 6), (1, 4), (4, 4)] {
            let seqs = lex_sequences(k, n).unwrap();
            assert_eq!(seqs.len(), binomial(n, k).unwrap());
            for (r, s) in seqs.iter().enumerate() {
                assert_eq!(s.rank(), r, "rank of {s} in Q({k},{n})");
                assert_eq!(&unrank(r, k, n).unwrap(), s);
            }
            // Lexicographic and strictly increasing across the enumeration.
            for w in seqs.windows(2) {
                assert!(w[0].elements() < w[1].elements());
            }
        }
    }

    #[test]
    fn order_preconditions_are_enforced() {
        assert!(lex_sequences(0, 3).is_err());
        assert!(lex_sequences(4, 3).is_err());
        assert!(lex_sequences(2, 0).is_err());
        assert!(lex_sequences(2, 21).is_err());
        assert!(lex_sequences_with_cap(2, 21, 32).is_ok());
    }

    #[test]
    fn index_set_validation() {
        assert!(IndexSet::new(vec![], 3).is_err());
        assert!(IndexSet::new(vec![0, 1], 3).is_err());
        assert!(IndexSet::new(vec![1, 1], 3).is_err());
        assert!(IndexSet::new(vec![2, 1], 3).is_err());
        assert!(IndexSet::new(vec![1, 4], 3).is_err());
        let s = IndexSet::new(vec![1, 3], 3).unwrap();
        assert!(s.contains(3) && !s.contains(2));
        assert_eq!(s.zero_based(), vec![0, 2]);
    }
}
