//! Consistency and analytic properties of matrix measures and their
//! compound-order closed forms.

mod common;

use common::{random_matrix, seeded_rng};
use kcomp::compound::{add_compound, alpha_add_compound};
use kcomp::dynamics::thomas_system;
use kcomp::linalg::complex_eigenvalues;
use kcomp::matrix::DenseMatrix;
use kcomp::measures::{compound_measure, matrix_norm, measure, MeasureKind};
use rand::Rng;

const KINDS: [MeasureKind; 3] = [MeasureKind::L1, MeasureKind::L2, MeasureKind::LInf];

#[test]
fn compound_measure_agrees_with_measure_of_compound() {
    let mut rng = seeded_rng(0x71);
    for trial in 0..100 {
        let a = random_matrix(&mut rng, 5, 5, -2.0, 2.0);
        for k in 1..=5 {
            let comp = add_compound(&a, k).unwrap().matrix;
            for kind in KINDS {
                let fast = compound_measure(&a, k, kind).unwrap();
                let direct = measure(&comp, kind).unwrap();
                assert!(
                    (fast - direct).abs() <= 1e-9 * (1.0 + direct.abs()),
                    "trial {trial}, k={k}, {kind}: {fast} vs {direct}"
                );
            }
        }
    }
}

#[test]
fn top_order_measure_is_the_trace() {
    let mut rng = seeded_rng(0x73);
    for _ in 0..20 {
        let n = rng.gen_range(2..=6);
        let a = random_matrix(&mut rng, n, n, -3.0, 3.0);
        let tr = a.trace().unwrap();
        for kind in KINDS {
            let mu = compound_measure(&a, n, kind).unwrap();
            assert!((mu - tr).abs() <= 1e-12 * (1.0 + tr.abs()), "{kind}: {mu} vs {tr}");
        }
    }
}

#[test]
fn measures_are_subadditive_and_dominate_the_spectral_abscissa() {
    let mut rng = seeded_rng(0x83);
    for _ in 0..60 {
        let n = rng.gen_range(2..=5);
        let a = random_matrix(&mut rng, n, n, -2.0, 2.0);
        let b = random_matrix(&mut rng, n, n, -2.0, 2.0);
        let abscissa = complex_eigenvalues(&a)
            .unwrap()
            .iter()
            .map(|c| c.re)
            .fold(f64::NEG_INFINITY, f64::max);
        for kind in KINDS {
            let mu_sum = measure(&a.add(&b).unwrap(), kind).unwrap();
            let bound = measure(&a, kind).unwrap() + measure(&b, kind).unwrap();
            assert!(mu_sum <= bound + 1e-12, "{kind}: {mu_sum} > {bound}");
            let mu = measure(&a, kind).unwrap();
            assert!(mu >= abscissa - 1e-9, "{kind}: measure {mu} below abscissa {abscissa}");
        }
    }
}

#[test]
fn measure_matches_the_norm_difference_quotient() {
    // One-sided derivative definition: (|I + eps A| - 1) / eps at small eps.
    let mut rng = seeded_rng(0x89);
    let eps = 1e-6;
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let a = random_matrix(&mut rng, n, n, -2.0, 2.0);
        let perturbed = DenseMatrix::identity(n).add(&a.scale(eps)).unwrap();
        for kind in KINDS {
            let quotient = (matrix_norm(&perturbed, kind) - 1.0) / eps;
            let mu = measure(&a, kind).unwrap();
            assert!((quotient - mu).abs() <= 1e-4, "{kind}: quotient {quotient} vs mu {mu}");
        }
    }
}

#[test]
fn thomas_fractional_measure_attains_the_closed_form_bound() {
    // Open-loop Jacobian: mu1 of the fractional compound is maximized where
    // every cosine equals 1, giving 1 - 2b - s(b+1).
    let (b, s) = (0.1, 0.8);
    let sys = thomas_system(b, 0.0).unwrap();
    let region = sys.state_space.as_ref().unwrap();
    let mut worst = f64::NEG_INFINITY;
    for x in region.grid(11).unwrap() {
        let j = sys.jacobian_at(0.0, &x).unwrap();
        let mu = measure(&alpha_add_compound(&j, 2.0 + s).unwrap(), MeasureKind::L1).unwrap();
        worst = worst.max(mu);
    }
    let bound = 1.0 - 2.0 * b - s * (b + 1.0);
    assert!(worst <= bound + 1e-10, "grid maximum {worst} exceeds {bound}");
    // An 11-point grid on a symmetric box contains the maximizing origin.
    assert!((worst - bound).abs() <= 1e-10, "grid maximum {worst} vs bound {bound}");
}
