//! Helpers shared by the integration suites: deterministic randomness and
//! oracles that are independent of the library's computation paths.
#![allow(dead_code)]

use kcomp::DenseMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator so any failure is reproducible.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with entries drawn uniformly from [lo, hi).
pub fn random_matrix(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    lo: f64,
    hi: f64,
) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(lo..hi)).expect("finite entries")
}

/// Determinant by recursive cofactor expansion along the first row; shares
/// no code with the LU factorization used inside the library.
pub fn cofactor_det(m: &DenseMatrix) -> f64 {
    assert!(m.is_square(), "cofactor determinant needs a square matrix");
    let n = m.rows();
    if n == 1 {
        return m.get(0, 0);
    }
    let mut acc = 0.0;
    for j in 0..n {
        let pivot = m.get(0, j);
        if pivot == 0.0 {
            continue;
        }
        let rows: Vec<usize> = (1..n).collect();
        let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
        let sub = m.submatrix(&rows, &cols).expect("indices in range");
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * pivot * cofactor_det(&sub);
    }
    acc
}

/// Asserts that two complex multisets, given as (re, im) pairs, match within
/// `tol` under a greedy nearest-neighbour pairing.
pub fn assert_complex_multisets_close(got: &[(f64, f64)], want: &[(f64, f64)], tol: f64) {
    assert_eq!(got.len(), want.len(), "multiset sizes differ");
    let mut used = vec![false; want.len()];
    for &(re, im) in got {
        let mut best: Option<(usize, f64)> = None;
        for (i, &(wre, wim)) in want.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = ((re - wre).powi(2) + (im - wim).powi(2)).sqrt();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (i, d) = best.expect("unused candidate exists");
        assert!(
            d <= tol,
            "value {re}+{im}i is {d} away from its nearest unused match (tol {tol})"
        );
        used[i] = true;
    }
}

/// Random tridiagonal matrix with strictly positive super- and sub-diagonal
/// entries and unconstrained diagonal.
pub fn random_strict_jacobi(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            rng.gen_range(-1.0..0.5)
        } else if i.abs_diff(j) == 1 {
            rng.gen_range(0.2..1.5)
        } else {
            0.0
        }
    })
    .expect("finite entries")
}

/// Random vector whose minimal sign variation is at most `max_var`: sign
/// blocks with alternating signs and magnitudes bounded away from the zero
/// tolerance, with occasional exact zeros mixed in.
pub fn random_low_variation_vector(rng: &mut ChaCha8Rng, n: usize, max_var: usize) -> Vec<f64> {
    let variations = rng.gen_range(0..=max_var.min(n - 1));
    // Split indices into variations+1 contiguous blocks.
    let mut boundaries: Vec<usize> = (1..n).collect();
    for i in (1..boundaries.len()).rev() {
        let j = rng.gen_range(0..=i);
        boundaries.swap(i, j);
    }
    let mut cuts: Vec<usize> = boundaries.into_iter().take(variations).collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut sign = if rng.gen_range(0..2) == 0 { 1.0 } else { -1.0 };
    let mut x = Vec::with_capacity(n);
    let mut next_cut = 0;
    for i in 0..n {
        if cuts[next_cut] == i {
            sign = -sign;
            next_cut += 1;
        }
        if rng.gen_range(0..10) == 0 {
            x.push(0.0);
        } else {
            x.push(sign * rng.gen_range(0.1..2.0));
        }
    }
    if x.iter().all(|&v| v == 0.0) {
        x[0] = sign;
    }
    x
}
