//! Algebraic property suites for the compound operations: multiplicativity,
//! spectral mapping, inverses, linearity, and agreement with independent
//! oracles.

mod common;

use common::{
    assert_complex_multisets_close, cofactor_det, random_matrix, seeded_rng,
};
use kcomp::combinat::lex_sequences;
use kcomp::compound::{add_compound, add_compound_oracle, minor, mult_compound};
use kcomp::linalg::complex_eigenvalues;
use rand::Rng;

#[test]
fn cauchy_binet_on_random_triples() {
    let mut rng = seeded_rng(0x11);
    for trial in 0..200 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=6);
        let p = rng.gen_range(1..=6);
        let a = random_matrix(&mut rng, n, m, -1.0, 1.0);
        let b = random_matrix(&mut rng, m, p, -1.0, 1.0);
        let ab = a.matmul(&b).unwrap();
        for k in 1..=n.min(m).min(p) {
            let left = mult_compound(&ab, k).unwrap().matrix;
            let right = mult_compound(&a, k)
                .unwrap()
                .matrix
                .matmul(&mult_compound(&b, k).unwrap().matrix)
                .unwrap();
            let err = left.sub(&right).unwrap().max_abs() / right.max_abs().max(1.0);
            assert!(err <= 1e-9, "trial {trial}, k={k}: relative error {err}");
        }
    }
}

#[test]
fn compound_spectra_are_k_fold_products_and_sums() {
    let mut rng = seeded_rng(0x23);
    for _ in 0..30 {
        let n = rng.gen_range(2..=6);
        let a = random_matrix(&mut rng, n, n, -1.0, 1.0);
        let eigs: Vec<(f64, f64)> =
            complex_eigenvalues(&a).unwrap().iter().map(|c| (c.re, c.im)).collect();
        for k in 1..=n {
            let sets = lex_sequences(k, n).unwrap();
            let want_products: Vec<(f64, f64)> = sets
                .iter()
                .map(|s| {
                    s.zero_based().iter().fold((1.0, 0.0), |(re, im), &i| {
                        let (er, ei) = eigs[i];
                        (re * er - im * ei, re * ei + im * er)
                    })
                })
                .collect();
            let got_products: Vec<(f64, f64)> =
                complex_eigenvalues(&mult_compound(&a, k).unwrap().matrix)
                    .unwrap()
                    .iter()
                    .map(|c| (c.re, c.im))
                    .collect();
            assert_complex_multisets_close(&got_products, &want_products, 1e-7);

            let want_sums: Vec<(f64, f64)> = sets
                .iter()
                .map(|s| {
                    s.zero_based()
                        .iter()
                        .fold((0.0, 0.0), |(re, im), &i| (re + eigs[i].0, im + eigs[i].1))
                })
                .collect();
            let got_sums: Vec<(f64, f64)> =
                complex_eigenvalues(&add_compound(&a, k).unwrap().matrix)
                    .unwrap()
                    .iter()
                    .map(|c| (c.re, c.im))
                    .collect();
            assert_complex_multisets_close(&got_sums, &want_sums, 1e-7);
        }
    }
}

#[test]
fn compound_of_inverse_is_inverse_of_compound() {
    let mut rng = seeded_rng(0x37);
    for _ in 0..40 {
        let n = rng.gen_range(2..=6);
        let mut a = random_matrix(&mut rng, n, n, -1.0, 1.0);
        // Diagonal shift keeps the matrix comfortably invertible.
        for i in 0..n {
            a.set(i, i, a.get(i, i) + n as f64);
        }
        let inv = a.inverse().unwrap();
        for k in 1..=n {
            let left = mult_compound(&inv, k).unwrap().matrix;
            let right = mult_compound(&a, k).unwrap().matrix.inverse().unwrap();
            let err = left.sub(&right).unwrap().max_abs() / right.max_abs().max(1.0);
            assert!(err <= 1e-8, "n={n}, k={k}: relative error {err}");
        }
    }
}

#[test]
fn additive_compound_is_linear() {
    let mut rng = seeded_rng(0x41);
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        let a = random_matrix(&mut rng, n, n, -2.0, 2.0);
        let b = random_matrix(&mut rng, n, n, -2.0, 2.0);
        let (ca, cb) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        for k in 1..=n {
            let lhs = add_compound(&a.scale(ca).add(&b.scale(cb)).unwrap(), k).unwrap().matrix;
            let rhs = add_compound(&a, k)
                .unwrap()
                .matrix
                .scale(ca)
                .add(&add_compound(&b, k).unwrap().matrix.scale(cb))
                .unwrap();
            let err = lhs.sub(&rhs).unwrap().max_abs();
            assert!(err <= 1e-12 * (1.0 + rhs.max_abs()), "n={n}, k={k}: {err}");
        }
    }
}

#[test]
fn explicit_entries_match_perturbation_oracle() {
    // The oracle differentiates minors of the perturbed identity by
    // polynomial interpolation and never touches the entry formula.
    let mut rng = seeded_rng(0x53);
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let a = random_matrix(&mut rng, n, n, -2.0, 2.0);
        for k in 1..=n {
            let explicit = add_compound(&a, k).unwrap().matrix;
            let oracle = add_compound_oracle(&a, k).unwrap();
            let err = explicit.sub(&oracle).unwrap().max_abs();
            assert!(err <= 1e-8, "n={n}, k={k}: oracle deviation {err}");
        }
    }
}

#[test]
fn minors_match_cofactor_expansion() {
    let mut rng = seeded_rng(0x61);
    for _ in 0..50 {
        let rows = rng.gen_range(1..=6);
        let cols = rng.gen_range(1..=6);
        let a = random_matrix(&mut rng, rows, cols, -1.5, 1.5);
        let k = rng.gen_range(1..=rows.min(cols));
        for alpha in lex_sequences(k, rows).unwrap() {
            for beta in lex_sequences(k, cols).unwrap() {
                let got = minor(&a, &alpha, &beta).unwrap();
                let sub = a.submatrix(&alpha.zero_based(), &beta.zero_based()).unwrap();
                let want = cofactor_det(&sub);
                assert!(
                    (got - want).abs() <= 1e-12 * (1.0 + want.abs()),
                    "minor ({alpha}, {beta}): {got} vs {want}"
                );
            }
        }
    }
}
