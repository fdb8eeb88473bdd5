//! Standard dense numerics used by the compound machinery: matrix
//! exponential, principal logarithm and real powers, eigenvalue and singular
//! value computations (delegated to nalgebra), and Gauss-Legendre quadrature
//! nodes.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Eigenvalues of a symmetric matrix, sorted in descending order.
///
/// The input is symmetrised as (A + A^T)/2 first, so callers may pass a
/// matrix that is symmetric only up to rounding.
pub fn sym_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::domain("eigenvalues require a square matrix"));
    }
    let sym = m.add(&m.transpose())?.scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(to_na(&sym));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok(vals)
}

/// All eigenvalues of a real square matrix, as complex numbers.
pub fn complex_eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return Err(Error::domain("eigenvalues require a square matrix"));
    }
    Ok(to_na(m).complex_eigenvalues().iter().copied().collect())
}

/// Singular values in descending order.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = to_na(m).singular_values().iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    vals
}

fn norm1(m: &DenseMatrix) -> f64 {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m.get(i, j).abs()).sum::<f64>())
        .fold(0.0_f64, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant (the standard double-precision recipe).
pub fn expm(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::domain("matrix exponential requires a square matrix"));
    }
    let n = a.rows();
    let id = DenseMatrix::identity(n);

    // Pade-13 numerator coefficients; the approximant is accurate to unit
    // round-off for 1-norms up to theta.
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    const THETA: f64 = 5.371_920_351_148_152;

    let nrm = norm1(a);
    let squarings = if nrm > THETA {
        ((nrm / THETA).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let b = a.scale(0.5_f64.powi(squarings));

    let b2 = b.matmul(&b)?;
    let b4 = b2.matmul(&b2)?;
    let b6 = b2.matmul(&b4)?;

    let u_inner = b6
        .matmul(&b6.scale(B[13]).add(&b4.scale(B[11]))?.add(&b2.scale(B[9]))?)?
        .add(&b6.scale(B[7]))?
        .add(&b4.scale(B[5]))?
        .add(&b2.scale(B[3]))?
        .add(&id.scale(B[1]))?;
    let u = b.matmul(&u_inner)?;
    let v = b6
        .matmul(&b6.scale(B[12]).add(&b4.scale(B[10]))?.add(&b2.scale(B[8]))?)?
        .add(&b6.scale(B[6]))?
        .add(&b4.scale(B[4]))?
        .add(&b2.scale(B[2]))?
        .add(&id.scale(B[0]))?;

    // r = (V - U)^-1 (V + U), then undo the scaling by repeated squaring.
    let mut r = v.sub(&u)?.solve(&v.add(&u)?)?;
    for _ in 0..squarings {
        r = r.matmul(&r)?;
    }
    Ok(r)
}

/// Principal square root via the Denman-Beavers iteration.
///
/// Converges quadratically for matrices with no eigenvalues on the closed
/// negative real axis; divergence is reported as an unsupported-domain error.
pub fn sqrtm(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::domain("matrix square root requires a square matrix"));
    }
    let mut y = a.clone();
    let mut z = DenseMatrix::identity(a.rows());
    for _ in 0..60 {
        let y_next = y.add(&z.inverse()?)?.scale(0.5);
        let z_next = z.add(&y.inverse()?)?.scale(0.5);
        let delta = y_next.sub(&y)?.max_abs();
        let scale = y_next.max_abs().max(1e-300);
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * scale {
            return Ok(y);
        }
    }
    Err(Error::unsupported(
        "matrix square root iteration did not converge; spectrum too close to the negative real axis",
    ))
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Square roots are taken until the argument is close to the identity, the
/// logarithm of the final factor is summed from the atanh series, and the
/// result is rescaled. Defined for matrices with no eigenvalues on the closed
/// negative real axis.
pub fn logm(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::domain("matrix logarithm requires a square matrix"));
    }
    let n = a.rows();
    let id = DenseMatrix::identity(n);
    let mut m = a.clone();
    let mut doublings = 0i32;
    while norm1(&m.sub(&id)?) > 0.25 {
        if doublings >= 60 {
            return Err(Error::unsupported(
                "matrix logarithm did not reduce to the identity; spectrum likely touches the negative real axis",
            ));
        }
        m = sqrtm(&m)?;
        doublings += 1;
    }
    // log M = 2 atanh(X) with X = (M - I)(M + I)^-1 and ||X|| <~ 0.12 here,
    // so a short odd-power series reaches round-off.
    let x = m.add(&id)?.transpose().solve(&m.sub(&id)?.transpose())?.transpose();
    let x2 = x.matmul(&x)?;
    let mut term = x.clone();
    let mut acc = x.clone();
    for i in 1..40 {
        term = term.matmul(&x2)?;
        let coeff = 1.0 / (2 * i + 1) as f64;
        acc = acc.add(&term.scale(coeff))?;
        if term.max_abs() * coeff <= 1e-17 * acc.max_abs().max(1e-300) {
            break;
        }
    }
    Ok(acc.scale(2.0 * 2.0_f64.powi(doublings)))
}

/// Principal real power `A^p` via `exp(p log A)`.
///
/// Diagonal and symmetric inputs take exact/spectral fast paths. For general
/// inputs the principal logarithm is used, so the spectrum must stay off the
/// closed negative real axis (callers are expected to have checked this; the
/// iteration reports an unsupported-domain error if it fails to converge).
pub fn matrix_power(a: &DenseMatrix, p: f64) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::domain("matrix power requires a square matrix"));
    }
    if !p.is_finite() {
        return Err(Error::domain("exponent must be finite"));
    }
    let n = a.rows();
    if p == 0.0 {
        return Ok(DenseMatrix::identity(n));
    }
    if p == 1.0 {
        return Ok(a.clone());
    }
    let scale = a.max_abs();
    let is_diagonal = (0..n).all(|i| (0..n).all(|j| i == j || a.get(i, j) == 0.0));
    if is_diagonal {
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            let d = a.get(i, i);
            if d <= 0.0 {
                return Err(Error::unsupported(format!(
                    "diagonal entry {d} is on the closed negative real axis; principal power undefined"
                )));
            }
            out.set(i, i, d.powf(p));
        }
        return Ok(out);
    }
    let asym = a.sub(&a.transpose())?.max_abs();
    if asym <= 1e-13 * scale.max(1e-300) {
        // Symmetric: spectral power.
        let sym = a.add(&a.transpose())?.scale(0.5);
        let eig = nalgebra::SymmetricEigen::new(to_na(&sym));
        for &lam in eig.eigenvalues.iter() {
            if lam <= 0.0 {
                return Err(Error::unsupported(format!(
                    "eigenvalue {lam} is on the closed negative real axis; principal power undefined"
                )));
            }
        }
        let powered = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.powf(p)));
        let res = &eig.eigenvectors * powered * eig.eigenvectors.transpose();
        return DenseMatrix::new(n, n, res.transpose().as_slice().to_vec());
    }
    expm(&logm(a)?.scale(p))
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [0, 1].
///
/// Nodes are found by Newton iteration on the Legendre recurrence; `n` up to
/// a few hundred is accurate to round-off, far beyond what the segment
/// quadrature here needs.
pub fn gauss_legendre(n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::domain("quadrature order must be positive"));
    }
    let mut out = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Chebyshev-based initial guess for the i-th root of P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' at x by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = p1;
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map from [-1, 1] to [0, 1].
        out.push(((x + 1.0) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("nodes are finite"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= tol
    }

    #[test]
    fn sym_eigenvalues_of_known_matrix() {
        // Eigenvalues of [[2,1],[1,2]] are 3 and 1.
        let m = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let vals = sym_eigenvalues(&m).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_eigenvalues_of_rotation_block() {
        // [[0,-1],[1,0]] has eigenvalues +/- i.
        let m = DenseMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let mut vals = complex_eigenvalues(&m).unwrap();
        vals.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((vals[0].im + 1.0).abs() < 1e-12 && vals[0].re.abs() < 1e-12);
        assert!((vals[1].im - 1.0).abs() < 1e-12 && vals[1].re.abs() < 1e-12);
    }

    #[test]
    fn expm_diagonal_is_entrywise_exp() {
        let m = DenseMatrix::diagonal(&[0.5, -1.0, 2.0]).unwrap();
        let e = expm(&m).unwrap();
        for (i, &d) in [0.5, -1.0, 2.0].iter().enumerate() {
            assert!((e.get(i, i) - f64::exp(d)).abs() < 1e-14 * f64::exp(d).abs());
        }
        assert!(e.get(0, 1).abs() < 1e-16);
    }

    #[test]
    fn expm_times_expm_of_negation_is_identity() {
        let m = DenseMatrix::from_rows(&[
            vec![0.3, -1.2, 0.7],
            vec![2.0, 0.1, -0.4],
            vec![-0.5, 0.9, -0.2],
        ])
        .unwrap();
        let prod = expm(&m).unwrap().matmul(&expm(&m.scale(-1.0)).unwrap()).unwrap();
        assert!(approx_eq(&prod, &DenseMatrix::identity(3), 1e-13));
    }

    #[test]
    fn expm_matches_series_for_nilpotent() {
        // N^2 = 0, so exp(N) = I + N exactly.
        let n = DenseMatrix::from_rows(&[vec![0.0, 3.0], vec![0.0, 0.0]]).unwrap();
        let e = expm(&n).unwrap();
        let expected = DenseMatrix::from_rows(&[vec![1.0, 3.0], vec![0.0, 1.0]]).unwrap();
        assert!(approx_eq(&e, &expected, 1e-14));
    }

    #[test]
    fn logm_inverts_expm() {
        let m = DenseMatrix::from_rows(&[
            vec![0.2, 0.5, -0.1],
            vec![0.0, -0.3, 0.4],
            vec![0.1, 0.0, 0.1],
        ])
        .unwrap();
        let back = logm(&expm(&m).unwrap()).unwrap();
        assert!(approx_eq(&back, &m, 1e-12));
    }

    #[test]
    fn sqrtm_squares_back() {
        let m = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![0.5, 3.0]]).unwrap();
        let r = sqrtm(&m).unwrap();
        assert!(approx_eq(&r.matmul(&r).unwrap(), &m, 1e-12));
    }

    #[test]
    fn matrix_power_fast_paths_and_general() {
        let d = DenseMatrix::diagonal(&[2.0, 3.0, 6.0]).unwrap();
        let p = matrix_power(&d, 0.9).unwrap();
        assert!((p.get(0, 0) - 2.0_f64.powf(0.9)).abs() < 1e-15);
        assert!((p.get(2, 2) - 6.0_f64.powf(0.9)).abs() < 1e-15);

        // Symmetric positive definite. (A^{1/2})^2 = A.
        let spd = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let h = matrix_power(&spd, 0.5).unwrap();
        assert!(approx_eq(&h.matmul(&h).unwrap(), &spd, 1e-12));

        // General matrix, positive spectrum: A^{0.5} squared is A.
        let g = DenseMatrix::from_rows(&[vec![3.0, 1.0], vec![0.2, 2.0]]).unwrap();
        let gh = matrix_power(&g, 0.5).unwrap();
        assert!(approx_eq(&gh.matmul(&gh).unwrap(), &g, 1e-11));

        // Negative diagonal entry: principal power undefined.
        let neg = DenseMatrix::diagonal(&[1.0, -2.0]).unwrap();
        assert!(matches!(matrix_power(&neg, 0.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn gauss_legendre_known_rules() {
        // Two-point rule on [0,1]: nodes 1/2 -/+ 1/(2 sqrt 3), weights 1/2.
        let rule = gauss_legendre(2).unwrap();
        let d = 1.0 / (2.0 * 3.0_f64.sqrt());
        assert!((rule[0].0 - (0.5 - d)).abs() < 1e-15);
        assert!((rule[1].0 - (0.5 + d)).abs() < 1e-15);
        assert!((rule[0].1 - 0.5).abs() < 1e-15);

        // The n-point rule integrates x^(2n-1) exactly.
        for n in [3usize, 5, 8] {
            let rule = gauss_legendre(n).unwrap();
            let deg = 2 * n - 1;
            let quad: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!(
                (quad - exact).abs() < 1e-14,
                "{n}-point rule failed on x^{deg}: {quad} vs {exact}"
            );
        }
    }
}
