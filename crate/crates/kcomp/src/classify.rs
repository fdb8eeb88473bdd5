//! Structural classification of matrices (Metzler, irreducible, Jacobi,
//! compound sign patterns) and sample-based certification of k-positivity,
//! k-cooperativity, k-contraction and diagonal stability of compounds.
//!
//! Certification is always grid/sample-based: the reports record the sample
//! set and never claim a universal certificate over a continuum.

use crate::compound::add_compound;
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::DenseMatrix;
use crate::measures::{compound_measure, measure, MeasureKind};

/// Property a certificate talks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    /// mu(A^[k](t)) <= -eta < 0 at every sample (integer order).
    KContracting,
    /// Same with fractional order alpha.
    AlphaContracting,
    /// A^[k](t) Metzler at every sample.
    KPositive,
    /// A^[k](t) Metzler everywhere, irreducible at almost all samples.
    StronglyKPositive,
    /// Jacobian compound Metzler across a state-space grid.
    KCooperative,
    /// D A^[k] + (A^[k])^T D negative-definite for a supplied diagonal D.
    KDiagStable,
}

/// Outcome of a certification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The sampled condition holds with positive margin.
    Certified,
    /// A sample violates the condition; a witness is attached.
    Refuted,
    /// Neither certified nor refuted (e.g. irreducibility holds at too few
    /// samples to certify "strong" but sign conditions never fail).
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Certified => write!(f, "Certified"),
            Verdict::Refuted => write!(f, "Refuted"),
            Verdict::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}

/// A matrix sample tagged with where it came from: a time label and/or a
/// state-space point.
#[derive(Debug, Clone)]
pub struct MatrixSample {
    /// Time (or sample index when sampling a spatial grid).
    pub label: f64,
    /// State-space point for Jacobian samples.
    pub point: Option<Vec<f64>>,
    /// The sampled matrix.
    pub matrix: DenseMatrix,
}

impl MatrixSample {
    /// Sample of a time-varying matrix at time `t`.
    pub fn at_time(t: f64, matrix: DenseMatrix) -> Self {
        MatrixSample { label: t, point: None, matrix }
    }

    /// Sample of a state-dependent matrix at point `x` (label = sample index).
    pub fn at_point(index: usize, x: Vec<f64>, matrix: DenseMatrix) -> Self {
        MatrixSample { label: index as f64, point: Some(x), matrix }
    }
}

/// Where and how a certificate failed (or what the binding sample was).
#[derive(Debug, Clone)]
pub struct Witness {
    /// Label of the offending sample (time or index).
    pub label: f64,
    /// State-space point of the offending sample, when it has one.
    pub point: Option<Vec<f64>>,
    /// Offending entry, 1-based (row, column), for sign-pattern failures.
    pub location: Option<(usize, usize)>,
    /// Offending value (entry value, measure value, or fraction).
    pub value: f64,
    /// Human-readable explanation.
    pub detail: String,
}

/// Description of the sample set a certificate was computed on.
#[derive(Debug, Clone)]
pub struct GridMeta {
    /// Free-text description (e.g. "t in [0, 6.28], 201 uniform samples").
    pub description: String,
    /// Number of samples inspected.
    pub samples: usize,
}

/// Result of a certification run. Refuted reports always carry a witness;
/// Certified reports always carry a positive margin.
#[derive(Debug, Clone)]
pub struct CertReport {
    /// Property that was tested.
    pub property: PropertyKind,
    /// Verdict over the sampled set.
    pub verdict: Verdict,
    /// Integer order k or fractional order alpha.
    pub k_or_alpha: f64,
    /// Measure kind for contraction certificates.
    pub measure_kind: Option<MeasureKind>,
    /// Contraction rate eta, or minimal off-diagonal slack for sign patterns.
    pub margin: f64,
    /// Offending sample for Refuted (binding information otherwise).
    pub witness: Option<Witness>,
    /// The sample set the verdict is based on.
    pub grid: GridMeta,
    /// Additional reasoning recorded with the verdict (e.g. the convexity
    /// argument that lifts grid samples to segment averages).
    pub rationale: Option<String>,
}

/// Options shared by the sample-based certifiers.
#[derive(Debug, Clone)]
pub struct CertOptions {
    /// Metzler tolerance; `None` selects 1e-12 * max|entry| per sample.
    pub metzler_tol: Option<f64>,
    /// Maximal fraction of samples allowed to be reducible in "strong"
    /// certificates (the isolated-exceptions proxy).
    pub max_reducible_fraction: f64,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions { metzler_tol: None, max_reducible_fraction: 0.01 }
    }
}

/// Default Metzler tolerance for a matrix: 1e-12 * max|entry|.
pub fn default_metzler_tol(a: &DenseMatrix) -> f64 {
    1e-12 * a.max_abs()
}

/// Result of a Metzler test: verdict plus the most negative off-diagonal
/// entry as (1-based row, 1-based column, value), absent for 1x1 matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MetzlerCheck {
    /// True iff every off-diagonal entry >= -tol.
    pub is_metzler: bool,
    /// Most negative off-diagonal entry: (row, column, value), 1-based.
    pub worst: Option<(usize, usize, f64)>,
}

/// Tests whether all off-diagonal entries are >= -tol; the witness reports
/// the most negative off-diagonal entry.
pub fn is_metzler(a: &DenseMatrix, tol: f64) -> Result<MetzlerCheck> {
    if !a.is_square() {
        return Err(Error::domain("Metzler test requires a square matrix"));
    }
    let n = a.rows();
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = a.get(i, j);
            if worst.map_or(true, |(_, _, w)| v < w) {
                worst = Some((i + 1, j + 1, v));
            }
        }
    }
    let ok = worst.map_or(true, |(_, _, w)| w >= -tol);
    Ok(MetzlerCheck { is_metzler: ok, worst })
}

/// Strong connectivity of the digraph with an edge i -> j iff a_ij != 0
/// (exact zero test on the structural matrix). A 1x1 matrix counts as
/// irreducible.
pub fn is_irreducible(a: &DenseMatrix) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::domain("irreducibility test requires a square matrix"));
    }
    let n = a.rows();
    if n == 1 {
        return Ok(true);
    }
    let edge = |i: usize, j: usize| i != j && a.get(i, j) != 0.0;
    // Strongly connected iff node 0 reaches every node in the graph and in
    // its transpose.
    let reaches_all = |transpose: bool| -> bool {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let connected = if transpose { edge(v, u) } else { edge(u, v) };
                if connected && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    Ok(reaches_all(false) && reaches_all(true))
}

/// Which closed-form sign-pattern case applied in
/// [`metzler_compound_pattern`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternCase {
    /// k = 1: plain Metzler test.
    FirstOrder,
    /// k = n-1: off-diagonal signs alternate with the parity of i-j.
    TopOrder,
    /// odd k with 1 < k < n-1: tridiagonal-nonnegative with nonnegative
    /// corners, zero elsewhere.
    InteriorOdd,
    /// even k with 1 < k < n-1: same band but nonpositive corners.
    InteriorEven,
}

/// Verdict of the closed-form sign-pattern test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternCheck {
    /// True iff `A^[k]` is Metzler, decided from the sign pattern of `A`.
    pub holds: bool,
    /// Which case of the closed form applied.
    pub case: PatternCase,
}

/// Decides whether `A^[k]` is Metzler directly from the sign pattern of `A`,
/// without forming the compound. Requires n >= 3 and 1 <= k <= n-1.
///
/// Cases: k = 1 is the plain Metzler test; k = n-1 requires a_ij >= 0 for
/// i-j odd and a_ij <= 0 for off-diagonal i-j even; for 1 < k < n-1 the
/// super- and sub-diagonal must be nonnegative, everything strictly inside
/// the band must vanish, and the corners a_1n, a_n1 must be nonnegative for
/// odd k and nonpositive for even k.
pub fn metzler_compound_pattern(a: &DenseMatrix, k: usize) -> Result<PatternCheck> {
    if !a.is_square() {
        return Err(Error::domain("sign-pattern test requires a square matrix"));
    }
    let n = a.rows();
    if n < 3 {
        return Err(Error::domain("sign-pattern test requires n >= 3"));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::domain(format!(
            "sign-pattern order k = {k} must satisfy 1 <= k <= {}",
            n - 1
        )));
    }
    if k == 1 {
        let holds = is_metzler(a, 0.0)?.is_metzler;
        return Ok(PatternCheck { holds, case: PatternCase::FirstOrder });
    }
    if k == n - 1 {
        let mut holds = true;
        'outer: for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = a.get(i, j);
                let diff_odd = (i as i64 - j as i64).rem_euclid(2) == 1;
                let ok = if diff_odd { v >= 0.0 } else { v <= 0.0 };
                if !ok {
                    holds = false;
                    break 'outer;
                }
            }
        }
        return Ok(PatternCheck { holds, case: PatternCase::TopOrder });
    }
    // Interior orders: band + corner pattern.
    let case = if k % 2 == 1 { PatternCase::InteriorOdd } else { PatternCase::InteriorEven };
    let mut holds = true;
    'scan: for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = a.get(i, j);
            let dist = i.abs_diff(j);
            let ok = if dist == 1 {
                v >= 0.0
            } else if dist == n - 1 {
                match case {
                    PatternCase::InteriorOdd => v >= 0.0,
                    _ => v <= 0.0,
                }
            } else {
                v == 0.0
            };
            if !ok {
                holds = false;
                break 'scan;
            }
        }
    }
    Ok(PatternCheck { holds, case })
}

/// Tridiagonality with positive (strict) or nonnegative (relaxed) super- and
/// sub-diagonal entries; the diagonal is unconstrained.
pub fn is_jacobi(a: &DenseMatrix, strict_offdiag: bool) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::domain("Jacobi test requires a square matrix"));
    }
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j);
            match i.abs_diff(j) {
                0 => {}
                1 => {
                    if strict_offdiag && v <= 0.0 {
                        return Ok(false);
                    }
                    if !strict_offdiag && v < 0.0 {
                        return Ok(false);
                    }
                }
                _ => {
                    if v != 0.0 {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

fn check_samples(samples: &[MatrixSample]) -> Result<usize> {
    let first = samples
        .first()
        .ok_or_else(|| Error::domain("certification requires at least one sample"))?;
    let n = first.matrix.rows();
    for s in samples {
        if !s.matrix.is_square() || s.matrix.rows() != n {
            return Err(Error::domain(
                "all samples must be square matrices of equal dimension",
            ));
        }
    }
    Ok(n)
}

/// First off-diagonal entry (row-major) below -tol, 1-based, with its value.
fn first_violation(m: &DenseMatrix, tol: f64) -> Option<(usize, usize, f64)> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j && m.get(i, j) < -tol {
                return Some((i + 1, j + 1, m.get(i, j)));
            }
        }
    }
    None
}

/// Certifies k-positivity over matrix samples: `A^[k]` must be Metzler at
/// every sample; `strong` additionally requires `A^[k]` irreducible at a
/// fraction >= 1 - max_reducible_fraction of the samples (the finite proxy
/// for "all but isolated times").
///
/// Margin: the minimum over samples of (smallest off-diagonal entry + tol).
/// The witness of a Refuted verdict is the first violating entry of the
/// first violating sample, in row-major order.
pub fn certify_k_positive(
    samples: &[MatrixSample],
    k: usize,
    strong: bool,
    grid: GridMeta,
    opts: &CertOptions,
) -> Result<CertReport> {
    let n = check_samples(samples)?;
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "compound order k = {k} must satisfy 1 <= k <= {n}"
        )));
    }
    let property = if strong { PropertyKind::StronglyKPositive } else { PropertyKind::KPositive };
    let mut margin = f64::INFINITY;
    let mut refutation: Option<Witness> = None;
    let mut reducible = 0usize;
    let mut first_reducible: Option<&MatrixSample> = None;
    for sample in samples {
        let comp = add_compound(&sample.matrix, k)?.matrix;
        let tol = opts.metzler_tol.unwrap_or_else(|| default_metzler_tol(&comp));
        let check = is_metzler(&comp, tol)?;
        if let Some((_, _, w)) = check.worst {
            margin = margin.min(w + tol);
        }
        if !check.is_metzler && refutation.is_none() {
            let (i, j, v) = first_violation(&comp, tol)
                .expect("a non-Metzler matrix has a violating entry");
            refutation = Some(Witness {
                label: sample.label,
                point: sample.point.clone(),
                location: Some((i, j)),
                value: v,
                detail: format!(
                    "off-diagonal entry ({i},{j}) of the order-{k} additive compound is {v}, below -tol = {}",
                    -tol
                ),
            });
        }
        if strong && !is_irreducible(&comp)? {
            reducible += 1;
            first_reducible.get_or_insert(sample);
        }
    }
    if margin == f64::INFINITY {
        margin = 0.0; // 1x1 compounds have no off-diagonal constraints
    }
    if let Some(witness) = refutation {
        return Ok(CertReport {
            property,
            verdict: Verdict::Refuted,
            k_or_alpha: k as f64,
            measure_kind: None,
            margin,
            witness: Some(witness),
            grid,
            rationale: None,
        });
    }
    if strong {
        let fraction_ok = 1.0 - reducible as f64 / samples.len() as f64;
        if fraction_ok < 1.0 - opts.max_reducible_fraction {
            // Sign conditions hold everywhere, but irreducibility fails too
            // often to pass as "isolated exceptions" -- and failing at many
            // samples does not refute it either.
            let sample = first_reducible.expect("reducible count > 0");
            return Ok(CertReport {
                property,
                verdict: Verdict::Inconclusive,
                k_or_alpha: k as f64,
                measure_kind: None,
                margin,
                witness: Some(Witness {
                    label: sample.label,
                    point: sample.point.clone(),
                    location: None,
                    value: fraction_ok,
                    detail: format!(
                        "order-{k} compound irreducible at only {:.1}% of samples (need >= {:.1}%)",
                        100.0 * fraction_ok,
                        100.0 * (1.0 - opts.max_reducible_fraction)
                    ),
                }),
                grid,
                rationale: Some(
                    "Metzler sign conditions hold at every sample, but irreducibility fails at \
                     more than the allowed fraction; sampling cannot tell isolated exceptional \
                     times from an interval of reducibility."
                        .to_string(),
                ),
            });
        }
    }
    Ok(CertReport {
        property,
        verdict: Verdict::Certified,
        k_or_alpha: k as f64,
        measure_kind: None,
        margin,
        witness: None,
        grid,
        rationale: None,
    })
}

/// Certifies k-contraction over matrix samples: eta = -max over samples of
/// the compound measure (integer order) or of the measure of the
/// fractional-order additive compound. Certified iff eta > 0, with
/// margin = eta; Refuted reports the maximising sample as witness.
pub fn certify_k_contracting(
    samples: &[MatrixSample],
    k_or_alpha: f64,
    kind: MeasureKind,
    grid: GridMeta,
) -> Result<CertReport> {
    let n = check_samples(samples)?;
    if !(1.0..=n as f64).contains(&k_or_alpha) {
        return Err(Error::domain(format!(
            "order {k_or_alpha} must lie in [1, {n}]"
        )));
    }
    let integer_order = (k_or_alpha - k_or_alpha.round()).abs() < 1e-9;
    let property = if integer_order { PropertyKind::KContracting } else { PropertyKind::AlphaContracting };
    let mut worst = f64::NEG_INFINITY;
    let mut worst_sample: Option<&MatrixSample> = None;
    for sample in samples {
        let mu = if integer_order {
            compound_measure(&sample.matrix, k_or_alpha.round() as usize, kind)?
        } else {
            measure(&crate::compound::alpha_add_compound(&sample.matrix, k_or_alpha)?, kind)?
        };
        if mu > worst {
            worst = mu;
            worst_sample = Some(sample);
        }
    }
    let eta = -worst;
    let certified = eta > 0.0;
    let witness = if certified {
        None
    } else {
        let sample = worst_sample.expect("samples are non-empty");
        Some(Witness {
            label: sample.label,
            point: sample.point.clone(),
            location: None,
            value: worst,
            detail: format!(
                "measure of the order-{k_or_alpha} compound reaches {worst} >= 0 at this sample"
            ),
        })
    };
    Ok(CertReport {
        property,
        verdict: if certified { Verdict::Certified } else { Verdict::Refuted },
        k_or_alpha,
        measure_kind: Some(kind),
        margin: eta,
        witness,
        grid,
        rationale: None,
    })
}

/// Certifies k-cooperativity of a nonlinear system from its Jacobian over a
/// grid covering a convex state-space region: `J(x)^[k]` must be Metzler at
/// every grid point (plus irreducibility for `strong`, as in
/// [`certify_k_positive`]).
///
/// Because the additive compound is linear in its argument, the
/// segment-averaged Jacobians appearing in the variational equation are
/// convex combinations of the sampled compounds, so (up to the sampling gap)
/// the sign pattern transfers to them; this is recorded in the rationale.
pub fn certify_k_cooperative<F>(
    jacobian: F,
    domain_grid: &[Vec<f64>],
    k: usize,
    strong: bool,
    grid: GridMeta,
    opts: &CertOptions,
) -> Result<CertReport>
where
    F: Fn(&[f64]) -> Result<DenseMatrix>,
{
    if domain_grid.is_empty() {
        return Err(Error::domain("cooperativity certification requires a non-empty grid"));
    }
    let samples: Vec<MatrixSample> = domain_grid
        .iter()
        .enumerate()
        .map(|(i, x)| Ok(MatrixSample::at_point(i, x.clone(), jacobian(x)?)))
        .collect::<Result<_>>()?;
    let mut report = certify_k_positive(&samples, k, strong, grid, opts)?;
    report.property = PropertyKind::KCooperative;
    let convexity_note = "additive compounds are linear, so segment-averaged Jacobians over the \
                          convex region inherit the Metzler pattern verified at the grid points \
                          (subject to the grid resolution)";
    report.rationale = Some(match report.rationale.take() {
        Some(prev) => format!("{convexity_note}; {prev}"),
        None => convexity_note.to_string(),
    });
    Ok(report)
}

/// Outcome of a diagonal-stability test of a compound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagStability {
    /// True iff the symmetric form is negative-definite.
    pub stable: bool,
    /// Largest eigenvalue of D A^[k] + (A^[k])^T D.
    pub lambda_max: f64,
}

/// Checks whether the supplied positive diagonal D (given by its diagonal
/// entries, dimension C(n,k)) makes `D A^[k] + (A^[k])^T D` negative-definite.
/// Searching for D is out of scope; this only verifies a candidate.
pub fn k_diag_stability_check(a: &DenseMatrix, k: usize, d: &[f64]) -> Result<DiagStability> {
    if !a.is_square() {
        return Err(Error::domain("diagonal stability check requires a square matrix"));
    }
    let comp = add_compound(a, k)?.matrix;
    if d.len() != comp.rows() {
        return Err(Error::domain(format!(
            "diagonal scaling has length {}, expected C({},{k}) = {}",
            d.len(),
            a.rows(),
            comp.rows()
        )));
    }
    if d.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::domain("diagonal scaling entries must be strictly positive"));
    }
    let dm = DenseMatrix::diagonal(d)?;
    let form = dm.matmul(&comp)?.add(&comp.transpose().matmul(&dm)?)?;
    let lambda_max = linalg::sym_eigenvalues(&form)?[0];
    Ok(DiagStability { stable: lambda_max < 0.0, lambda_max })
}
