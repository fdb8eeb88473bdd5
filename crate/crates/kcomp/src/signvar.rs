//! Sign-variation counts, the variation-bounded cones, and sign-regularity
//! tests of order k.
//!
//! `s_minus` counts adjacent sign changes after deleting zero entries;
//! `s_plus` is the maximum count over all ways of replacing each zero by +1
//! or -1. Flows generated by Metzler additive compounds do not increase these
//! counts, which is what makes them useful as integer-valued Lyapunov
//! functions.

use crate::combinat::lex_sequences;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Default zero-detection tolerance for floating-point vectors:
/// 1e-9 * the max-abs entry. Exact-zero vectors get tolerance 0.
pub fn default_zero_tol(x: &[f64]) -> f64 {
    1e-9 * x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn signs_with_tol(x: &[f64], tol: f64) -> Vec<i8> {
    x.iter()
        .map(|&v| {
            if v.abs() <= tol {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Minimal sign variation: zeros (entries with |x_i| <= tol) are deleted and
/// adjacent sign changes counted. Uses the default tolerance.
pub fn s_minus(x: &[f64]) -> Result<usize> {
    s_minus_with_tol(x, default_zero_tol(x))
}

/// [`s_minus`] with an explicit zero tolerance.
pub fn s_minus_with_tol(x: &[f64], tol: f64) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::domain("sign variation of an empty vector"));
    }
    let mut count = 0usize;
    let mut last: i8 = 0;
    for s in signs_with_tol(x, tol) {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    Ok(count)
}

/// Maximal sign variation: every zero entry may be replaced by +1 or -1 and
/// the variation count is maximised over all completions. Computed exactly by
/// dynamic programming over the completions. Uses the default tolerance.
pub fn s_plus(x: &[f64]) -> Result<usize> {
    s_plus_with_tol(x, default_zero_tol(x))
}

/// [`s_plus`] with an explicit zero tolerance.
pub fn s_plus_with_tol(x: &[f64], tol: f64) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::domain("sign variation of an empty vector"));
    }
    // best[0] / best[1]: the most sign changes achievable so far with the
    // last (possibly filled) entry negative / positive.
    const NEG: [i8; 1] = [-1];
    const POS: [i8; 1] = [1];
    const FREE: [i8; 2] = [-1, 1];
    let mut best: [Option<usize>; 2] = [None, None];
    for s in signs_with_tol(x, tol) {
        let choices: &[i8] = match s {
            0 => &FREE,
            1 => &POS,
            _ => &NEG,
        };
        let mut next: [Option<usize>; 2] = [None, None];
        for &c in choices {
            let idx = usize::from(c > 0);
            let mut candidate = match (best[idx], best[1 - idx]) {
                (None, None) => Some(0), // first entry
                (same, other) => same.max(other.map(|v| v + 1)),
            };
            if let Some(cur) = next[idx] {
                candidate = candidate.max(Some(cur));
            }
            next[idx] = candidate;
        }
        best = next;
    }
    Ok(best[0].max(best[1]).expect("non-empty vector always admits a completion"))
}

/// Which of the two variation-bounded cones to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeVariant {
    /// Closed cone: s_minus(x) <= k - 1.
    Closed,
    /// Open cone: s_plus(x) <= k - 1.
    Open,
}

/// Membership of `x` in the order-k variation cone: the closed variant
/// requires s_minus(x) <= k-1, the open variant s_plus(x) <= k-1.
/// For k = n both cones are the whole space.
pub fn in_cone(x: &[f64], k: usize, variant: ConeVariant) -> Result<bool> {
    if k == 0 || k > x.len() {
        return Err(Error::domain(format!(
            "cone order k = {k} must satisfy 1 <= k <= {}",
            x.len()
        )));
    }
    let count = match variant {
        ConeVariant::Closed => s_minus(x)?,
        ConeVariant::Open => s_plus(x)?,
    };
    Ok(count <= k - 1)
}

/// Common-sign classification of all order-k minors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    /// All minors > tol (strict mode only).
    Positive,
    /// All minors < -tol (strict mode only).
    Negative,
    /// All minors >= -tol (non-strict mode only).
    NonNegative,
    /// All minors <= tol (non-strict mode only).
    NonPositive,
    /// Minors of both signs beyond the tolerance band.
    Mixed,
}

/// Classifies the common sign of all k-by-k minors of `A` (sign-regularity of
/// order k). In strict mode every minor must clear the tolerance band; in
/// non-strict mode minors inside the band count as zero. When every minor is
/// inside the band, the non-strict verdict is NonNegative.
pub fn sign_regular_order(a: &DenseMatrix, k: usize, strict: bool, tol: f64) -> Result<SignClass> {
    if k == 0 || k > a.rows().min(a.cols()) {
        return Err(Error::domain(format!(
            "minor order k = {k} must satisfy 1 <= k <= min({}, {})",
            a.rows(),
            a.cols()
        )));
    }
    if tol < 0.0 {
        return Err(Error::domain("tolerance must be nonnegative"));
    }
    let mut min_minor = f64::INFINITY;
    let mut max_minor = f64::NEG_INFINITY;
    for alpha in lex_sequences(k, a.rows())? {
        let rows = alpha.zero_based();
        for beta in lex_sequences(k, a.cols())? {
            let m = a.submatrix(&rows, &beta.zero_based())?.det()?;
            min_minor = min_minor.min(m);
            max_minor = max_minor.max(m);
        }
    }
    Ok(if strict {
        if min_minor > tol {
            SignClass::Positive
        } else if max_minor < -tol {
            SignClass::Negative
        } else {
            SignClass::Mixed
        }
    } else if min_minor >= -tol {
        SignClass::NonNegative
    } else if max_minor <= tol {
        SignClass::NonPositive
    } else {
        SignClass::Mixed
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variation_counts_golden_vector() {
        let x = [-1.0, 0.0, 0.0, 2.0, -3.0];
        assert_eq!(s_minus(&x).unwrap(), 2);
        assert_eq!(s_plus(&x).unwrap(), 4);
    }

    #[test]
    fn uniform_sign_vectors_have_no_variation() {
        assert_eq!(s_minus(&[1.0, 2.0, 0.5]).unwrap(), 0);
        assert_eq!(s_plus(&[1.0, 2.0, 0.5]).unwrap(), 0);
        assert_eq!(s_minus(&[0.0, 0.0, 0.0]).unwrap(), 0);
        // All-zero vector: every completion is admissible, so s_plus = n-1.
        assert_eq!(s_plus(&[0.0, 0.0, 0.0]).unwrap(), 2);
        assert!(s_minus(&[]).is_err());
    }

    fn brute_force_s_plus(x: &[f64]) -> usize {
        // Enumerate all +/-1 fills of the zero entries.
        let zeros: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 0.0).collect();
        let mut best = 0;
        for mask in 0..(1u32 << zeros.len()) {
            let mut filled: Vec<f64> = x.to_vec();
            for (bit, &idx) in zeros.iter().enumerate() {
                filled[idx] = if mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
            }
            best = best.max(s_minus_with_tol(&filled, 0.0).unwrap());
        }
        best
    }

    #[test]
    fn s_plus_matches_brute_force_fills_exhaustively() {
        // All vectors over {-1, 0, 1}^5.
        for code in 0..3usize.pow(5) {
            let mut x = [0.0f64; 5];
            let mut c = code;
            for item in &mut x {
                *item = (c % 3) as f64 - 1.0;
                c /= 3;
            }
            assert_eq!(
                s_plus_with_tol(&x, 0.0).unwrap(),
                brute_force_s_plus(&x),
                "vector {x:?}"
            );
        }
    }

    #[test]
    fn variation_chain_and_zero_free_equality() {
        for code in 0..3usize.pow(5) {
            let mut x = [0.0f64; 5];
            let mut c = code;
            for item in &mut x {
                *item = (c % 3) as f64 - 1.0;
                c /= 3;
            }
            let lo = s_minus_with_tol(&x, 0.0).unwrap();
            let hi = s_plus_with_tol(&x, 0.0).unwrap();
            assert!(lo <= hi && hi <= 4);
            if x.iter().all(|&v| v != 0.0) {
                assert_eq!(lo, hi);
            }
        }
    }

    #[test]
    fn cone_membership() {
        // s_minus = 1, so the closed cone of order 2 contains it.
        assert!(in_cone(&[4.0, -21.0, -1.0], 2, ConeVariant::Closed).unwrap());
        // k = n always contains everything.
        assert!(in_cone(&[1.0, -1.0, 1.0], 3, ConeVariant::Closed).unwrap());
        assert!(in_cone(&[1.0, -1.0, 1.0], 3, ConeVariant::Open).unwrap());
        // First-order closed cone = vectors without strict sign changes.
        assert!(in_cone(&[1.0, 0.0, 2.0], 1, ConeVariant::Closed).unwrap());
        assert!(!in_cone(&[1.0, 0.0, -2.0], 1, ConeVariant::Closed).unwrap());
        // Open cone is stricter near zeros: s_plus([1,0,2]) = 2.
        assert!(!in_cone(&[1.0, 0.0, 2.0], 1, ConeVariant::Open).unwrap());
        assert!(in_cone(&[1.0, 0.5, 2.0], 1, ConeVariant::Open).unwrap());
        assert!(in_cone(&[1.0], 2, ConeVariant::Closed).is_err());
    }

    #[test]
    fn cones_nest_in_k() {
        for code in 0..3usize.pow(4) {
            let mut x = [0.0f64; 4];
            let mut c = code;
            for item in &mut x {
                *item = (c % 3) as f64 - 1.0;
                c /= 3;
            }
            for k in 1..4 {
                for variant in [ConeVariant::Closed, ConeVariant::Open] {
                    if in_cone(&x, k, variant).unwrap() {
                        assert!(in_cone(&x, k + 1, variant).unwrap(), "{x:?} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn scaling_and_negation_invariance() {
        let x = [-1.0, 0.0, 3.0, -0.5, 0.0, 2.0];
        let scaled: Vec<f64> = x.iter().map(|v| 7.25 * v).collect();
        let negated: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(s_minus(&x).unwrap(), s_minus(&scaled).unwrap());
        assert_eq!(s_plus(&x).unwrap(), s_plus(&scaled).unwrap());
        assert_eq!(s_minus(&x).unwrap(), s_minus(&negated).unwrap());
        assert_eq!(s_plus(&x).unwrap(), s_plus(&negated).unwrap());
    }

    #[test]
    fn sign_regular_classification_basics() {
        let id = DenseMatrix::identity(3);
        assert_eq!(sign_regular_order(&id, 2, false, 0.0).unwrap(), SignClass::NonNegative);
        // Strictly: zero minors block both strict classes.
        assert_eq!(sign_regular_order(&id, 2, true, 0.0).unwrap(), SignClass::Mixed);

        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(sign_regular_order(&a, 1, true, 0.0).unwrap(), SignClass::Positive);
        assert_eq!(sign_regular_order(&a, 2, true, 0.0).unwrap(), SignClass::Negative);

        let mixed = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(sign_regular_order(&mixed, 1, false, 0.0).unwrap(), SignClass::Mixed);
    }
}
