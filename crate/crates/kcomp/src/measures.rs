//! Vector norms, induced matrix norms, and matrix measures (logarithmic
//! norms) for L1/L2/L-infinity, plus closed-form measures of additive
//! compounds.
//!
//! The measure of a matrix is the one-sided derivative of the induced norm at
//! the identity: mu(A) = lim_{eps -> 0+} (||I + eps A|| - 1)/eps. A negative
//! measure of `A^[k]` forces exponential decay of k-dimensional volumes under
//! the flow of `A`, which is what the certifiers in [`crate::classify`] test.

use crate::combinat::lex_sequences;
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::DenseMatrix;

/// Which norm/measure family to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    /// Column-sum norm and its measure mu_1.
    L1,
    /// Spectral norm and its measure mu_2.
    L2,
    /// Row-sum norm and its measure mu_inf.
    LInf,
}

impl std::fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasureKind::L1 => write!(f, "l1"),
            MeasureKind::L2 => write!(f, "l2"),
            MeasureKind::LInf => write!(f, "linf"),
        }
    }
}

/// Vector norm of the given kind.
pub fn vector_norm(x: &[f64], kind: MeasureKind) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::domain("vector norm of an empty vector"));
    }
    Ok(match kind {
        MeasureKind::L1 => x.iter().map(|v| v.abs()).sum(),
        MeasureKind::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        MeasureKind::LInf => x.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
    })
}

/// Induced matrix norm: max column abs-sum (L1), largest singular value (L2),
/// or max row abs-sum (L-infinity).
pub fn matrix_norm(a: &DenseMatrix, kind: MeasureKind) -> f64 {
    match kind {
        MeasureKind::L1 => (0..a.cols())
            .map(|j| (0..a.rows()).map(|i| a.get(i, j).abs()).sum::<f64>())
            .fold(0.0_f64, f64::max),
        MeasureKind::L2 => linalg::singular_values(a)[0],
        MeasureKind::LInf => (0..a.rows())
            .map(|i| (0..a.cols()).map(|j| a.get(i, j).abs()).sum::<f64>())
            .fold(0.0_f64, f64::max),
    }
}

/// Matrix measure mu of a square matrix:
/// mu_1 = max_j (a_jj + sum_{i != j} |a_ij|),
/// mu_2 = largest eigenvalue of (A + A^T)/2,
/// mu_inf = max_i (a_ii + sum_{j != i} |a_ij|).
pub fn measure(a: &DenseMatrix, kind: MeasureKind) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::domain("matrix measure requires a square matrix"));
    }
    let n = a.rows();
    Ok(match kind {
        MeasureKind::L1 => (0..n)
            .map(|j| {
                a.get(j, j)
                    + (0..n)
                        .filter(|&i| i != j)
                        .map(|i| a.get(i, j).abs())
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max),
        MeasureKind::L2 => linalg::sym_eigenvalues(a)?[0],
        MeasureKind::LInf => (0..n)
            .map(|i| {
                a.get(i, i)
                    + (0..n)
                        .filter(|&j| j != i)
                        .map(|j| a.get(i, j).abs())
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Measure of the k-th additive compound `A^[k]`, evaluated in closed form
/// without building the compound:
///
/// * L1: max over alpha in Q(k,n) of
///   `sum_{j in alpha} a_jj + sum_{j in alpha} sum_{i not in alpha} |a_ij|`
///   (column sums of `A^[k]`),
/// * L2: sum of the k largest eigenvalues of (A + A^T)/2,
/// * L-infinity: the row-sum analogue of L1.
///
/// For k = n all three reduce to trace(A).
pub fn compound_measure(a: &DenseMatrix, k: usize, kind: MeasureKind) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::domain("compound measure requires a square matrix"));
    }
    let n = a.rows();
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "compound order k = {k} must satisfy 1 <= k <= {n}"
        )));
    }
    match kind {
        MeasureKind::L2 => {
            let eigs = linalg::sym_eigenvalues(a)?;
            Ok(eigs[..k].iter().sum())
        }
        MeasureKind::L1 | MeasureKind::LInf => {
            let mut best = f64::NEG_INFINITY;
            for alpha in lex_sequences(k, n)? {
                let mut total: f64 = alpha.elements().iter().map(|&p| a.get(p - 1, p - 1)).sum();
                for &p in alpha.elements() {
                    for other in 1..=n {
                        if alpha.contains(other) {
                            continue;
                        }
                        // Column sums for L1, row sums for L-infinity.
                        total += match kind {
                            MeasureKind::L1 => a.get(other - 1, p - 1).abs(),
                            MeasureKind::LInf => a.get(p - 1, other - 1).abs(),
                            MeasureKind::L2 => unreachable!(),
                        };
                    }
                }
                best = best.max(total);
            }
            Ok(best)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compound::add_compound;

    #[test]
    fn vector_norm_golden_values() {
        let x = [-1.0, 0.0, 0.0, 2.0, -3.0];
        assert_eq!(vector_norm(&x, MeasureKind::L1).unwrap(), 6.0);
        assert_eq!(vector_norm(&x, MeasureKind::LInf).unwrap(), 3.0);
        assert!((vector_norm(&x, MeasureKind::L2).unwrap() - 14.0_f64.sqrt()).abs() < 1e-15);
        assert!(vector_norm(&[], MeasureKind::L1).is_err());
        assert_eq!(vector_norm(&[0.0, 0.0], MeasureKind::L2).unwrap(), 0.0);
    }

    #[test]
    fn matrix_norm_of_identity_is_one() {
        let id = DenseMatrix::identity(4);
        for kind in [MeasureKind::L1, MeasureKind::L2, MeasureKind::LInf] {
            assert!((matrix_norm(&id, kind) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_of_diagonal_is_max_entry() {
        let d = DenseMatrix::diagonal(&[-3.0, 0.5, -1.0]).unwrap();
        for kind in [MeasureKind::L1, MeasureKind::L2, MeasureKind::LInf] {
            assert!((measure(&d, kind).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_l1_of_time_varying_example_at_zero() {
        // A(0) = [[-1, 0], [-2, 0]]: columns give max(-1 + 2, 0) = 1.
        let a = DenseMatrix::from_rows(&[vec![-1.0, 0.0], vec![-2.0, 0.0]]).unwrap();
        assert_eq!(measure(&a, MeasureKind::L1).unwrap(), 1.0);
        // Row version: max(-1 + 0, 0 + 2) = 2.
        assert_eq!(measure(&a, MeasureKind::LInf).unwrap(), 2.0);
    }

    #[test]
    fn compound_measure_top_order_is_trace() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, -4.0, 2.0],
            vec![0.3, -2.0, 1.1],
            vec![-0.7, 0.2, 0.5],
        ])
        .unwrap();
        let tr = a.trace().unwrap();
        for kind in [MeasureKind::L1, MeasureKind::L2, MeasureKind::LInf] {
            assert!(
                (compound_measure(&a, 3, kind).unwrap() - tr).abs() < 1e-12,
                "kind {kind}"
            );
        }
    }

    #[test]
    fn compound_measure_equals_measure_of_compound() {
        let a = DenseMatrix::from_rows(&[
            vec![-1.0, 1.0, -2.0],
            vec![0.0, 1.0, 0.1],
            vec![-3.0, 0.0, 1.0],
        ])
        .unwrap();
        for k in 1..=3usize {
            for kind in [MeasureKind::L1, MeasureKind::L2, MeasureKind::LInf] {
                let closed = compound_measure(&a, k, kind).unwrap();
                let direct = measure(&add_compound(&a, k).unwrap().matrix, kind).unwrap();
                assert!(
                    (closed - direct).abs() < 1e-12,
                    "k = {k}, kind {kind}: {closed} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn compound_measure_of_diagonal_is_sum_of_k_largest() {
        let d = DenseMatrix::diagonal(&[-5.0, -1.0, -3.0]).unwrap();
        for kind in [MeasureKind::L1, MeasureKind::L2, MeasureKind::LInf] {
            assert!((compound_measure(&d, 2, kind).unwrap() + 4.0).abs() < 1e-12); // -1 + -3
        }
        assert!(compound_measure(&d, 0, MeasureKind::L1).is_err());
        assert!(compound_measure(&d, 4, MeasureKind::L1).is_err());
    }
}
