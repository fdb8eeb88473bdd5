//! Multiplicative and additive compound matrices and their fractional-order
//! interpolations.
//!
//! For an n-by-m matrix `A` and 1 <= k <= min(n, m), the k-th multiplicative
//! compound `A^(k)` is the C(n,k)-by-C(m,k) matrix of all k-by-k minors,
//! with rows and columns ordered by the lexicographic enumeration of
//! [`crate::combinat::lex_sequences`]. The k-th additive compound of a square
//! matrix is the derivative of `(I + eps A)^(k)` at eps = 0; it is assembled
//! entry-by-entry from its closed form, so the derivative-based construction
//! in [`add_compound_oracle`] stays an independent cross-check.

use crate::combinat::{binomial, lex_sequences, IndexSet};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::DenseMatrix;

/// Which compound a [`CompoundMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompoundKind {
    /// All k-by-k minors: `A^(k)`.
    Multiplicative,
    /// Derivative of `(I + eps A)^(k)` at 0: `A^[k]`.
    Additive,
}

/// A compound matrix together with the shape and order it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundMatrix {
    /// Row count of the base matrix.
    pub base_rows: usize,
    /// Column count of the base matrix.
    pub base_cols: usize,
    /// Compound order k.
    pub order: usize,
    /// Multiplicative or additive.
    pub kind: CompoundKind,
    /// The compound itself, C(base_rows, k) by C(base_cols, k).
    pub matrix: DenseMatrix,
}

impl CompoundMatrix {
    /// Row index sequences (lexicographic Q(k, base_rows)).
    pub fn row_sets(&self) -> Result<Vec<IndexSet>> {
        lex_sequences(self.order, self.base_rows)
    }

    /// Column index sequences (lexicographic Q(k, base_cols)).
    pub fn col_sets(&self) -> Result<Vec<IndexSet>> {
        lex_sequences(self.order, self.base_cols)
    }
}

/// The minor `A[alpha | beta]`: the determinant of the submatrix with rows
/// `alpha` and columns `beta` (both 1-based, strictly increasing, same length).
pub fn minor(a: &DenseMatrix, alpha: &IndexSet, beta: &IndexSet) -> Result<f64> {
    if alpha.k() != beta.k() {
        return Err(Error::domain(format!(
            "minor requires |alpha| = |beta|, got {} and {}",
            alpha.k(),
            beta.k()
        )));
    }
    if alpha.elements()[alpha.k() - 1] > a.rows() || beta.elements()[beta.k() - 1] > a.cols() {
        return Err(Error::domain("minor index out of range for this matrix"));
    }
    a.submatrix(&alpha.zero_based(), &beta.zero_based())?.det()
}

/// The k-th multiplicative compound `A^(k)`: all k-by-k minors in
/// lexicographic order. `A` may be rectangular; k must not exceed either
/// dimension.
pub fn mult_compound(a: &DenseMatrix, k: usize) -> Result<CompoundMatrix> {
    if k == 0 || k > a.rows().min(a.cols()) {
        return Err(Error::domain(format!(
            "compound order k = {k} must satisfy 1 <= k <= min({}, {})",
            a.rows(),
            a.cols()
        )));
    }
    let matrix = if k == 1 {
        a.clone()
    } else if k == a.rows() && k == a.cols() {
        DenseMatrix::new(1, 1, vec![a.det()?])?
    } else {
        let rows = lex_sequences(k, a.rows())?;
        let cols = lex_sequences(k, a.cols())?;
        let mut m = DenseMatrix::zeros(rows.len(), cols.len());
        for (i, alpha) in rows.iter().enumerate() {
            let sub_rows = alpha.zero_based();
            for (j, beta) in cols.iter().enumerate() {
                let d = a.submatrix(&sub_rows, &beta.zero_based())?.det()?;
                m.set(i, j, d);
            }
        }
        m
    };
    Ok(CompoundMatrix {
        base_rows: a.rows(),
        base_cols: a.cols(),
        order: k,
        kind: CompoundKind::Multiplicative,
        matrix,
    })
}

/// Entry of the k-th additive compound at row set `alpha`, column set `beta`.
///
/// Three cases: equal sets give the diagonal-sum; sets differing in exactly
/// one element i_l vs j_m give `(-1)^(l+m) a[i_l, j_m]` (positions 1-based
/// within the sorted sets); anything else is zero.
fn add_compound_entry(a: &DenseMatrix, alpha: &[usize], beta: &[usize]) -> f64 {
    let k = alpha.len();
    let mut only_alpha: Option<(usize, usize)> = None; // (index value, 1-based position)
    let mut only_beta: Option<(usize, usize)> = None;
    let (mut i, mut j) = (0usize, 0usize);
    while i < k || j < k {
        if i < k && j < k && alpha[i] == beta[j] {
            i += 1;
            j += 1;
        } else if j == k || (i < k && alpha[i] < beta[j]) {
            if only_alpha.replace((alpha[i], i + 1)).is_some() {
                return 0.0; // differ in more than one element
            }
            i += 1;
        } else {
            if only_beta.replace((beta[j], j + 1)).is_some() {
                return 0.0;
            }
            j += 1;
        }
    }
    match (only_alpha, only_beta) {
        (None, None) => alpha.iter().map(|&v| a.get(v - 1, v - 1)).sum(),
        (Some((iv, l)), Some((jv, m))) => {
            let sign = if (l + m) % 2 == 0 { 1.0 } else { -1.0 };
            sign * a.get(iv - 1, jv - 1)
        }
        _ => unreachable!("equal-length sets have an even symmetric difference"),
    }
}

/// The k-th additive compound `A^[k]` of a square matrix, assembled from its
/// entrywise closed form.
pub fn add_compound(a: &DenseMatrix, k: usize) -> Result<CompoundMatrix> {
    if !a.is_square() {
        return Err(Error::domain("additive compound requires a square matrix"));
    }
    let n = a.rows();
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "compound order k = {k} must satisfy 1 <= k <= {n}"
        )));
    }
    let matrix = if k == 1 {
        a.clone()
    } else if k == n {
        DenseMatrix::new(1, 1, vec![a.trace()?])?
    } else {
        let sets = lex_sequences(k, n)?;
        let r = sets.len();
        let mut m = DenseMatrix::zeros(r, r);
        for (i, alpha) in sets.iter().enumerate() {
            for (j, beta) in sets.iter().enumerate() {
                m.set(i, j, add_compound_entry(a, alpha.elements(), beta.elements()));
            }
        }
        m
    };
    Ok(CompoundMatrix {
        base_rows: n,
        base_cols: n,
        order: k,
        kind: CompoundKind::Additive,
        matrix,
    })
}

/// Independent construction of `A^[k]` from its definition as the derivative
/// of `eps -> (I + eps A)^(k)` at 0.
///
/// Each entry of the perturbed multiplicative compound is a polynomial in eps
/// of degree at most k, so evaluating at the k+1 nodes `{1, .., k+1} * h`
/// (h = 1/(k+1)) determines it exactly; the linear coefficient is extracted
/// by solving the corresponding Vandermonde system once. Kept deliberately
/// free of the closed form used by [`add_compound`].
pub fn add_compound_oracle(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::domain("additive compound requires a square matrix"));
    }
    let n = a.rows();
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "compound order k = {k} must satisfy 1 <= k <= {n}"
        )));
    }
    let m = k + 1;
    let h = 1.0 / m as f64;
    let nodes: Vec<f64> = (1..=m).map(|i| i as f64 * h).collect();
    // Weights w with sum_r w_r * node_r^c = [c == 1] for c = 0..k, so that
    // the linear coefficient of any degree-<=k polynomial p is
    // sum_r w_r p(node_r).
    let vandermonde = DenseMatrix::from_fn(m, m, |c, r| nodes[r].powi(c as i32))?;
    let e1 = DenseMatrix::from_fn(m, 1, |c, _| if c == 1 { 1.0 } else { 0.0 })?;
    let w = vandermonde.solve(&e1)?;

    let r = binomial(n, k)?;
    let mut acc = DenseMatrix::zeros(r, r);
    let id = DenseMatrix::identity(n);
    for (idx, &eps) in nodes.iter().enumerate() {
        let perturbed = id.add(&a.scale(eps))?;
        let comp = mult_compound(&perturbed, k)?.matrix;
        acc = acc.add(&comp.scale(w.get(idx, 0)))?;
    }
    Ok(acc)
}

/// Kronecker product `A (x) B`.
pub fn kron_product(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let (p, q) = (a.rows(), a.cols());
    let (r, s) = (b.rows(), b.cols());
    let mut out = DenseMatrix::zeros(p * r, q * s);
    for i in 0..p {
        for j in 0..q {
            let aij = a.get(i, j);
            if aij == 0.0 {
                continue;
            }
            for u in 0..r {
                for v in 0..s {
                    out.set(i * r + u, j * s + v, aij * b.get(u, v));
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker sum `A (+) B = A (x) I_q + I_p (x) B` for square A (p-by-p) and
/// B (q-by-q). Its spectrum is all pairwise sums of the two spectra.
pub fn kron_sum(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::domain("Kronecker sum requires square matrices"));
    }
    let left = kron_product(a, &DenseMatrix::identity(b.rows()))?;
    let right = kron_product(&DenseMatrix::identity(a.rows()), b)?;
    left.add(&right)
}

/// Splits a fractional order alpha in [1, n] into (k, s) with
/// alpha = k + s, k integer >= 1 and s in [0, 1). Orders within 1e-9 of an
/// integer are treated as that integer.
fn split_order(alpha: f64, n: usize) -> Result<(usize, f64)> {
    if !alpha.is_finite() || alpha < 1.0 || alpha > n as f64 {
        return Err(Error::domain(format!(
            "fractional order alpha = {alpha} must lie in [1, {n}]"
        )));
    }
    let rounded = alpha.round();
    if (alpha - rounded).abs() < 1e-9 {
        return Ok((rounded as usize, 0.0));
    }
    Ok((alpha.floor() as usize, alpha - alpha.floor()))
}

/// Fractional-order additive compound
/// `A^[alpha] = ((1-s) A^[k]) (+) (s A^[k+1])` for alpha = k + s, s in (0, 1),
/// delegating to [`add_compound`] when alpha is an integer.
///
/// The Kronecker-sum form is linear in `A` and has dimension
/// C(n,k) * C(n,k+1) in the fractional case.
pub fn alpha_add_compound(a: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::domain("additive compound requires a square matrix"));
    }
    let (k, s) = split_order(alpha, a.rows())?;
    if s == 0.0 {
        return Ok(add_compound(a, k)?.matrix);
    }
    let low = add_compound(a, k)?.matrix.scale(1.0 - s);
    let high = add_compound(a, k + 1)?.matrix.scale(s);
    kron_sum(&low, &high)
}

/// Rejects matrices whose spectrum touches the closed negative real axis
/// (where the principal real power is undefined), naming the offending
/// eigenvalue.
fn check_principal_domain(m: &DenseMatrix, what: &str) -> Result<()> {
    let eigs = linalg::complex_eigenvalues(m)?;
    let radius = eigs.iter().map(|e| e.norm()).fold(0.0_f64, f64::max);
    for e in &eigs {
        if e.norm() <= 1e-13 * radius.max(1.0) {
            return Err(Error::domain(format!(
                "{what} is singular (eigenvalue {} + {}i); fractional compound undefined",
                e.re, e.im
            )));
        }
        if e.im.abs() <= 1e-12 * radius.max(1.0) && e.re < 0.0 {
            return Err(Error::unsupported(format!(
                "{what} has eigenvalue {} + {}i on the closed negative real axis; principal power undefined",
                e.re, e.im
            )));
        }
    }
    Ok(())
}

/// Fractional-order multiplicative compound
/// `A^(alpha) = (A^(k))^(1-s) (x) (A^(k+1))^s` for alpha = k + s, s in (0, 1),
/// delegating to [`mult_compound`] when alpha is an integer.
///
/// Both integer compounds must admit a principal real power: `A` must be
/// non-singular and the spectra of `A^(k)` and `A^(k+1)` must avoid the
/// closed negative real axis. Violations are reported with the offending
/// eigenvalue.
pub fn alpha_mult_compound(a: &DenseMatrix, alpha: f64) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::domain(
            "fractional multiplicative compound requires a square matrix",
        ));
    }
    let (k, s) = split_order(alpha, a.rows())?;
    if s == 0.0 {
        return Ok(mult_compound(a, k)?.matrix);
    }
    let low = mult_compound(a, k)?.matrix;
    let high = mult_compound(a, k + 1)?.matrix;
    check_principal_domain(&low, &format!("order-{k} compound"))?;
    check_principal_domain(&high, &format!("order-{} compound", k + 1))?;
    let low_pow = linalg::matrix_power(&low, 1.0 - s)?;
    let high_pow = linalg::matrix_power(&high, s)?;
    kron_product(&low_pow, &high_pow)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbered(n: usize) -> DenseMatrix {
        // a_ij = 10 i + j (1-based), every entry distinct.
        DenseMatrix::from_fn(n, n, |i, j| (10 * (i + 1) + (j + 1)) as f64).unwrap()
    }

    fn set(elems: &[usize], n: usize) -> IndexSet {
        IndexSet::new(elems.to_vec(), n).unwrap()
    }

    #[test]
    fn minor_selects_rows_and_columns() {
        let a = numbered(3);
        // A[{1,2} | {2,3}] = det [[12, 13], [22, 23]] = 12*23 - 13*22 = -10.
        let m = minor(&a, &set(&[1, 2], 3), &set(&[2, 3], 3)).unwrap();
        assert!((m + 10.0).abs() < 1e-12);
        // Full-size minor is the determinant.
        let full = minor(&a, &set(&[1, 2, 3], 3), &set(&[1, 2, 3], 3)).unwrap();
        assert!((full - a.det().unwrap()).abs() < 1e-12);
        // Mismatched lengths and out-of-range indices are domain errors.
        assert!(minor(&a, &set(&[1], 3), &set(&[1, 2], 3)).is_err());
        assert!(minor(&a, &set(&[1, 4], 4), &set(&[1, 2], 3)).is_err());
    }

    #[test]
    fn mult_compound_of_identity_and_first_order() {
        let id3 = DenseMatrix::identity(3);
        let c = mult_compound(&id3, 2).unwrap();
        assert_eq!(c.matrix, DenseMatrix::identity(3));
        let a = numbered(4);
        assert_eq!(mult_compound(&a, 1).unwrap().matrix, a);
    }

    #[test]
    fn mult_compound_top_order_is_determinant() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let c = mult_compound(&a, 2).unwrap();
        assert_eq!(c.matrix.rows(), 1);
        assert!((c.matrix.get(0, 0) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn mult_compound_of_upper_triangular_matches_closed_form() {
        let (a11, a12, a13, a22, a23, a33) = (1.3, -0.7, 2.1, 0.9, -1.4, 0.6);
        let a = DenseMatrix::from_rows(&[
            vec![a11, a12, a13],
            vec![0.0, a22, a23],
            vec![0.0, 0.0, a33],
        ])
        .unwrap();
        let c = mult_compound(&a, 2).unwrap().matrix;
        let expected = DenseMatrix::from_rows(&[
            vec![a11 * a22, a11 * a23, a12 * a23 - a13 * a22],
            vec![0.0, a11 * a33, a12 * a33],
            vec![0.0, 0.0, a22 * a33],
        ])
        .unwrap();
        assert!(c.sub(&expected).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn mult_compound_rejects_bad_orders() {
        let a = numbered(3);
        assert!(mult_compound(&a, 0).is_err());
        assert!(mult_compound(&a, 4).is_err());
    }

    #[test]
    fn add_compound_4x4_third_order_closed_form() {
        // For n = 4, k = 3 the additive compound in lexicographic order
        // ({123}, {124}, {134}, {234}) is
        //   [ a11+a22+a33   a34          -a24          a14        ]
        //   [ a43           a11+a22+a44   a23          -a13       ]
        //   [ -a42          a32           a11+a33+a44   a12       ]
        //   [ a41           -a31          a21           a22+a33+a44]
        let a = numbered(4);
        let g = |i: usize, j: usize| a.get(i - 1, j - 1);
        let expected = DenseMatrix::from_rows(&[
            vec![g(1, 1) + g(2, 2) + g(3, 3), g(3, 4), -g(2, 4), g(1, 4)],
            vec![g(4, 3), g(1, 1) + g(2, 2) + g(4, 4), g(2, 3), -g(1, 3)],
            vec![-g(4, 2), g(3, 2), g(1, 1) + g(3, 3) + g(4, 4), g(1, 2)],
            vec![g(4, 1), -g(3, 1), g(2, 1), g(2, 2) + g(3, 3) + g(4, 4)],
        ])
        .unwrap();
        let c = add_compound(&a, 3).unwrap().matrix;
        assert_eq!(c, expected);
        // Spot value: entry ({1,2,4}, {2,3,4}) = -a13 = -13.
        assert_eq!(c.get(1, 3), -13.0);
    }

    #[test]
    fn add_compound_second_order_of_3x3_golden() {
        let a = DenseMatrix::from_rows(&[
            vec![-1.0, 1.0, -2.0],
            vec![0.0, 1.0, 0.1],
            vec![-3.0, 0.0, 1.0],
        ])
        .unwrap();
        let c = add_compound(&a, 2).unwrap().matrix;
        let expected = DenseMatrix::from_rows(&[
            vec![0.0, 0.1, 2.0],
            vec![0.0, 0.0, 1.0],
            vec![3.0, 0.0, 2.0],
        ])
        .unwrap();
        assert_eq!(c, expected);
    }

    #[test]
    fn add_compound_diagonal_and_trace_cases() {
        let d = DenseMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let c = add_compound(&d, 2).unwrap().matrix;
        assert_eq!(c, DenseMatrix::diagonal(&[3.0, 4.0, 5.0]).unwrap());
        let top = add_compound(&d, 3).unwrap().matrix;
        assert_eq!(top.rows(), 1);
        assert_eq!(top.get(0, 0), 6.0);
        assert_eq!(add_compound(&d, 1).unwrap().matrix, d);
    }

    #[test]
    fn oracle_agrees_on_a_small_case() {
        let a = numbered(4);
        for k in 1..=4 {
            let direct = add_compound(&a, k).unwrap().matrix;
            let oracle = add_compound_oracle(&a, k).unwrap();
            let err = direct.sub(&oracle).unwrap().max_abs();
            assert!(err < 1e-9 * direct.max_abs().max(1.0), "k = {k}: err {err}");
        }
    }

    #[test]
    fn kron_product_golden() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![0.0, 5.0], vec![6.0, 7.0]]).unwrap();
        let k = kron_product(&a, &b).unwrap();
        let expected = DenseMatrix::from_rows(&[
            vec![0.0, 5.0, 0.0, 10.0],
            vec![6.0, 7.0, 12.0, 14.0],
            vec![0.0, 15.0, 0.0, 20.0],
            vec![18.0, 21.0, 24.0, 28.0],
        ])
        .unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_sum_of_scalars_adds() {
        let a = DenseMatrix::new(1, 1, vec![2.5]).unwrap();
        let b = DenseMatrix::new(1, 1, vec![-0.5]).unwrap();
        assert_eq!(kron_sum(&a, &b).unwrap().get(0, 0), 2.0);
    }

    #[test]
    fn alpha_add_compound_integer_orders_delegate() {
        let a = numbered(3);
        for k in 1..=3usize {
            let frac = alpha_add_compound(&a, k as f64).unwrap();
            assert_eq!(frac, add_compound(&a, k).unwrap().matrix);
        }
        assert!(alpha_add_compound(&a, 0.5).is_err());
        assert!(alpha_add_compound(&a, 3.5).is_err());
    }

    #[test]
    fn alpha_add_compound_of_scaled_identity() {
        // (c I)^[alpha] = alpha c I on the product space.
        let c = -0.7;
        let a = DenseMatrix::identity(3).scale(c);
        let alpha = 1.6;
        let m = alpha_add_compound(&a, alpha).unwrap();
        assert_eq!(m.rows(), 3 * 3); // C(3,1) * C(3,2)
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let expected = if i == j { alpha * c } else { 0.0 };
                assert!((m.get(i, j) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn alpha_mult_compound_of_diagonal_golden() {
        // diag(1,2,3): second compound diag(2,3,6), third compound [6];
        // alpha = 2.1 gives entries p^0.9 * 6^0.1 for p in {2, 3, 6}.
        let a = DenseMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let m = alpha_mult_compound(&a, 2.1).unwrap();
        assert_eq!(m.rows(), 3);
        let w = 6.0_f64.powf(0.1);
        for (i, p) in [2.0_f64, 3.0, 6.0].iter().enumerate() {
            assert!((m.get(i, i) - p.powf(0.9) * w).abs() < 1e-13);
        }
    }

    #[test]
    fn alpha_mult_compound_rejects_negative_spectrum() {
        // diag(1, -2, 3): the second compound has eigenvalue -2 * 3 = -6 on
        // the negative real axis.
        let a = DenseMatrix::diagonal(&[1.0, -2.0, 3.0]).unwrap();
        let err = alpha_mult_compound(&a, 2.5).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)), "got {err:?}");
        // Singular input is a domain error.
        let sing = DenseMatrix::diagonal(&[1.0, 0.0, 3.0]).unwrap();
        assert!(alpha_mult_compound(&sing, 2.5).is_err());
    }

    #[test]
    fn alpha_mult_compound_integer_orders_delegate() {
        let a = numbered(3);
        let m = alpha_mult_compound(&a, 2.0).unwrap();
        assert_eq!(m, mult_compound(&a, 2).unwrap().matrix);
    }
}
