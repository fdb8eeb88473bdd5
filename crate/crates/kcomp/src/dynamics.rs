//! Fixed-step integration of linear time-varying and nonlinear systems,
//! transition matrices and their compound-order counterparts, volume
//! tracking, variational (segment-averaged Jacobian) matrices, sign-variation
//! traces, and the built-in demo systems.
//!
//! A single integrator is used everywhere: classical fourth-order
//! Runge-Kutta with a fixed step, so trajectories are deterministic and
//! convergence-order checks are meaningful.

use crate::compound::{add_compound, mult_compound};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::DenseMatrix;
use crate::signvar::{s_minus, s_plus};

/// How a trajectory was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    /// Integrator name (always "rk4").
    pub method: String,
    /// Fixed step size used.
    pub step: f64,
}

impl TrajectoryMeta {
    fn rk4(step: f64) -> Self {
        TrajectoryMeta { method: "rk4".to_string(), step }
    }
}

/// A vector-valued trajectory: states aligned with strictly increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Strictly increasing sample times.
    pub times: Vec<f64>,
    /// State per sample time.
    pub states: Vec<Vec<f64>>,
    /// Integrator metadata.
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// State at the final time.
    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectories are non-empty")
    }
}

/// A matrix-valued trajectory (transition matrices and compound flows).
#[derive(Debug, Clone)]
pub struct MatrixTrajectory {
    /// Strictly increasing sample times.
    pub times: Vec<f64>,
    /// Matrix per sample time.
    pub matrices: Vec<DenseMatrix>,
    /// Integrator metadata.
    pub meta: TrajectoryMeta,
}

impl MatrixTrajectory {
    /// Matrix at the final time.
    pub fn last_matrix(&self) -> &DenseMatrix {
        self.matrices.last().expect("trajectories are non-empty")
    }
}

/// Axis-aligned box used as a state-space region for grids and membership
/// tests.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    /// Box with the given per-axis bounds; requires lo_i <= hi_i.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::domain("box bounds must be non-empty and of equal length"));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !l.is_finite() || !h.is_finite() || l > h {
                return Err(Error::domain("box bounds must be finite with lo <= hi"));
            }
        }
        Ok(BoxRegion { lo, hi })
    }

    /// The symmetric box [-r, r]^n.
    pub fn symmetric(n: usize, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain("box radius must be positive and finite"));
        }
        Self::new(vec![-r; n], vec![r; n])
    }

    /// Space dimension.
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Lower bounds per axis.
    pub fn lower(&self) -> &[f64] {
        &self.lo
    }

    /// Upper bounds per axis.
    pub fn upper(&self) -> &[f64] {
        &self.hi
    }

    /// Membership test (closed box).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    /// Uniform grid with `points_per_axis` points per axis, endpoints
    /// included (a single point per axis selects the center).
    pub fn grid(&self, points_per_axis: usize) -> Result<Vec<Vec<f64>>> {
        if points_per_axis == 0 {
            return Err(Error::domain("grid needs at least one point per axis"));
        }
        let n = self.dim();
        let mut total: usize = 1;
        for _ in 0..n {
            total = total
                .checked_mul(points_per_axis)
                .ok_or_else(|| Error::Overflow("grid size overflows".to_string()))?;
        }
        let axis_value = |axis: usize, idx: usize| -> f64 {
            if points_per_axis == 1 {
                0.5 * (self.lo[axis] + self.hi[axis])
            } else {
                let frac = idx as f64 / (points_per_axis - 1) as f64;
                self.lo[axis] + frac * (self.hi[axis] - self.lo[axis])
            }
        };
        let mut grid = Vec::with_capacity(total);
        let mut counter = vec![0usize; n];
        loop {
            grid.push((0..n).map(|axis| axis_value(axis, counter[axis])).collect());
            // Odometer increment over the per-axis indices.
            let mut axis = n;
            while axis > 0 {
                axis -= 1;
                counter[axis] += 1;
                if counter[axis] < points_per_axis {
                    break;
                }
                counter[axis] = 0;
                if axis == 0 {
                    return Ok(grid);
                }
            }
        }
    }
}

/// Right-hand-side description of a system.
pub enum SystemKind {
    /// Linear time-varying: x' = A(t) x.
    Ltv {
        /// Coefficient matrix as a function of time.
        a: Box<dyn Fn(f64) -> DenseMatrix + Send + Sync>,
    },
    /// Nonlinear: x' = f(t, x) with an analytic Jacobian.
    Nonlinear {
        /// Vector field.
        f: Box<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>,
        /// Jacobian of `f` with respect to x.
        jacobian: Box<dyn Fn(f64, &[f64]) -> DenseMatrix + Send + Sync>,
    },
}

impl std::fmt::Debug for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemKind::Ltv { .. } => write!(f, "Ltv"),
            SystemKind::Nonlinear { .. } => write!(f, "Nonlinear"),
        }
    }
}

/// A dynamical system: dimension, right-hand side, optional state-space box.
#[derive(Debug)]
pub struct SystemDef {
    dim: usize,
    /// Right-hand side.
    pub kind: SystemKind,
    /// Region used for grids and domain checks, when the model has one.
    pub state_space: Option<BoxRegion>,
}

impl SystemDef {
    /// Linear time-varying system of the given dimension.
    pub fn ltv(dim: usize, a: Box<dyn Fn(f64) -> DenseMatrix + Send + Sync>) -> Self {
        SystemDef { dim, kind: SystemKind::Ltv { a }, state_space: None }
    }

    /// Nonlinear system with analytic Jacobian.
    pub fn nonlinear(
        dim: usize,
        f: Box<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>,
        jacobian: Box<dyn Fn(f64, &[f64]) -> DenseMatrix + Send + Sync>,
        state_space: Option<BoxRegion>,
    ) -> Self {
        SystemDef { dim, kind: SystemKind::Nonlinear { f, jacobian }, state_space }
    }

    /// State dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True for linear time-varying systems.
    pub fn is_ltv(&self) -> bool {
        matches!(self.kind, SystemKind::Ltv { .. })
    }

    /// Coefficient matrix A(t); linear systems only.
    pub fn coefficient(&self, t: f64) -> Result<DenseMatrix> {
        match &self.kind {
            SystemKind::Ltv { a } => {
                let m = a(t);
                if m.rows() != self.dim || m.cols() != self.dim {
                    return Err(Error::domain(format!(
                        "coefficient callback returned {}x{}, expected {0}x{0}",
                        m.rows(),
                        m.cols()
                    )));
                }
                Ok(m)
            }
            SystemKind::Nonlinear { .. } => {
                Err(Error::domain("coefficient matrices are defined for linear systems only"))
            }
        }
    }

    /// Vector field value at (t, x).
    pub fn rhs(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::domain(format!(
                "state has dimension {}, system expects {}",
                x.len(),
                self.dim
            )));
        }
        match &self.kind {
            SystemKind::Ltv { .. } => self.coefficient(t)?.matvec(x),
            SystemKind::Nonlinear { f, .. } => {
                let v = f(t, x);
                if v.len() != self.dim {
                    return Err(Error::domain(format!(
                        "vector field returned dimension {}, expected {}",
                        v.len(),
                        self.dim
                    )));
                }
                Ok(v)
            }
        }
    }

    /// Jacobian of the right-hand side at (t, x); A(t) for linear systems.
    pub fn jacobian_at(&self, t: f64, x: &[f64]) -> Result<DenseMatrix> {
        match &self.kind {
            SystemKind::Ltv { .. } => self.coefficient(t),
            SystemKind::Nonlinear { jacobian, .. } => {
                let m = jacobian(t, x);
                if m.rows() != self.dim || m.cols() != self.dim {
                    return Err(Error::domain(format!(
                        "Jacobian callback returned {}x{}, expected {0}x{0}",
                        m.rows(),
                        m.cols()
                    )));
                }
                Ok(m)
            }
        }
    }
}

/// Sample times t0 + i*step up to t1, with t1 itself always the last entry.
fn time_steps(t_span: (f64, f64), step: f64) -> Result<Vec<f64>> {
    let (t0, t1) = t_span;
    if !t0.is_finite() || !t1.is_finite() || !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain("time span and step must be finite with step > 0"));
    }
    if t1 <= t0 {
        return Err(Error::domain("time span must have t1 > t0"));
    }
    let slack = 1e-9 * step;
    let mut times = Vec::new();
    let mut i: u64 = 0;
    loop {
        let t = t0 + i as f64 * step;
        if t >= t1 - slack {
            break;
        }
        times.push(t);
        i += 1;
    }
    times.push(t1);
    Ok(times)
}

fn rk4_step(sys: &SystemDef, t: f64, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let k1 = sys.rhs(t, x)?;
    let stage = |k: &[f64], c: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(v, kv)| v + c * h * kv).collect()
    };
    let k2 = sys.rhs(t + 0.5 * h, &stage(&k1, 0.5))?;
    let k3 = sys.rhs(t + 0.5 * h, &stage(&k2, 0.5))?;
    let k4 = sys.rhs(t + h, &stage(&k3, 1.0))?;
    Ok((0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrates x' = rhs(t, x) from `x0` over `t_span` with classical
/// fixed-step fourth-order Runge-Kutta. States are stored at t0 + i*step and
/// at the endpoint. A non-finite state aborts with a blow-up error carrying
/// the last time that produced a finite state.
pub fn integrate(sys: &SystemDef, x0: &[f64], t_span: (f64, f64), step: f64) -> Result<Trajectory> {
    if x0.len() != sys.dim() {
        return Err(Error::domain(format!(
            "initial state has dimension {}, system expects {}",
            x0.len(),
            sys.dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("initial state must be finite"));
    }
    let times = time_steps(t_span, step)?;
    let mut states = Vec::with_capacity(times.len());
    let mut x = x0.to_vec();
    states.push(x.clone());
    for w in times.windows(2) {
        x = rk4_step(sys, w[0], &x, w[1] - w[0])?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { last_good_t: w[0] });
        }
        states.push(x.clone());
    }
    Ok(Trajectory { times, states, meta: TrajectoryMeta::rk4(step) })
}

/// Integrates the matrix ODE M' = C(t) M, M(t0) = I, with the same stepping
/// rule as [`integrate`].
fn integrate_matrix_linear(
    coeff: &dyn Fn(f64) -> Result<DenseMatrix>,
    dim: usize,
    t_span: (f64, f64),
    step: f64,
) -> Result<MatrixTrajectory> {
    let times = time_steps(t_span, step)?;
    let mut m = DenseMatrix::identity(dim);
    let mut matrices = Vec::with_capacity(times.len());
    matrices.push(m.clone());
    for w in times.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let c1 = coeff(t)?;
        let cm = coeff(t + 0.5 * h)?;
        let c2 = coeff(t + h)?;
        let k1 = c1.matmul(&m)?;
        let k2 = cm.matmul(&m.add(&k1.scale(0.5 * h))?)?;
        let k3 = cm.matmul(&m.add(&k2.scale(0.5 * h))?)?;
        let k4 = c2.matmul(&m.add(&k3.scale(h))?)?;
        let incr = k1.add(&k2.scale(2.0))?.add(&k3.scale(2.0))?.add(&k4)?;
        m = m.add(&incr.scale(h / 6.0))?;
        if !m.max_abs().is_finite() {
            return Err(Error::Blowup { last_good_t: t });
        }
        matrices.push(m.clone());
    }
    Ok(MatrixTrajectory { times, matrices, meta: TrajectoryMeta::rk4(step) })
}

/// Transition-matrix trajectory of a linear time-varying system:
/// Phi' = A(t) Phi with Phi(t0) = I.
pub fn transition_matrix(
    sys: &SystemDef,
    t_span: (f64, f64),
    step: f64,
) -> Result<MatrixTrajectory> {
    if !sys.is_ltv() {
        return Err(Error::domain(
            "transition matrices are defined for linear time-varying systems only",
        ));
    }
    integrate_matrix_linear(&|t| sys.coefficient(t), sys.dim(), t_span, step)
}

/// Maximum deviation, over the stored times, between the order-k
/// multiplicative compound of the transition matrix and the solution of the
/// compound flow M' = A^[k](t) M, M(t0) = I. The two agree exactly in exact
/// arithmetic, so the value measures integrator error only.
pub fn compound_transition_residual(
    sys: &SystemDef,
    k: usize,
    t_span: (f64, f64),
    step: f64,
) -> Result<f64> {
    let phi = transition_matrix(sys, t_span, step)?;
    let r = crate::combinat::binomial(sys.dim(), k)? as usize;
    let compound_coeff = |t: f64| Ok(add_compound(&sys.coefficient(t)?, k)?.matrix);
    let psi = integrate_matrix_linear(&compound_coeff, r, t_span, step)?;
    let mut worst = 0.0_f64;
    for (p, direct) in phi.matrices.iter().zip(&psi.matrices) {
        let via_minors = mult_compound(p, k)?.matrix;
        worst = worst.max(via_minors.sub(direct)?.max_abs());
    }
    Ok(worst)
}

/// Volume of the parallelotope spanned by the given vectors: sqrt of the
/// Gram determinant, 0 for linearly dependent inputs. Requires at most as
/// many vectors as the space dimension.
pub fn k_volume(vectors: &[Vec<f64>]) -> Result<f64> {
    let k = vectors.len();
    if k == 0 {
        return Err(Error::domain("volume requires at least one vector"));
    }
    let n = vectors[0].len();
    if n == 0 || vectors.iter().any(|v| v.len() != n) {
        return Err(Error::domain("vectors must be non-empty and of equal dimension"));
    }
    if k > n {
        return Err(Error::domain(format!(
            "{k} vectors in dimension {n} cannot span a parallelotope"
        )));
    }
    let g = DenseMatrix::from_fn(n, k, |i, j| vectors[j][i])?;
    let gram = g.transpose().matmul(&g)?;
    // Rounding can push a degenerate Gram determinant slightly negative.
    Ok(gram.det()?.max(0.0).sqrt())
}

/// Segment-averaged Jacobian between the trajectories from `a` and `b` at
/// time `t` (trajectories start at time 0): the Gauss-Legendre quadrature of
/// J(t, s*x(t,a) + (1-s)*x(t,b)) over s in [0, 1]. The difference
/// z = x(t,a) - x(t,b) satisfies z' = A(t) z for this matrix. `quad_nodes`
/// defaults to 8.
pub fn variational_matrix(
    sys: &SystemDef,
    a: &[f64],
    b: &[f64],
    t: f64,
    quad_nodes: Option<usize>,
    step: f64,
) -> Result<DenseMatrix> {
    let nodes = quad_nodes.unwrap_or(8);
    if nodes < 2 {
        return Err(Error::domain("segment quadrature needs at least 2 nodes"));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain("evaluation time must be finite and nonnegative"));
    }
    let endpoint = |x0: &[f64]| -> Result<Vec<f64>> {
        if t == 0.0 {
            if x0.len() != sys.dim() {
                return Err(Error::domain("initial state dimension mismatch"));
            }
            Ok(x0.to_vec())
        } else {
            Ok(integrate(sys, x0, (0.0, t), step)?.last_state().to_vec())
        }
    };
    let xa = endpoint(a)?;
    let xb = endpoint(b)?;
    let mut acc = DenseMatrix::zeros(sys.dim(), sys.dim());
    for &(s, w) in &linalg::gauss_legendre(nodes)? {
        let point: Vec<f64> = xa.iter().zip(&xb).map(|(p, q)| s * p + (1.0 - s) * q).collect();
        acc = acc.add(&sys.jacobian_at(t, &point)?.scale(w))?;
    }
    Ok(acc)
}

/// Integrates from `x0` and reports (t, s-, s+) of the state at every stored
/// step, using the tolerance-aware sign-variation rules.
pub fn sign_variation_trace(
    sys: &SystemDef,
    x0: &[f64],
    t_span: (f64, f64),
    step: f64,
) -> Result<Vec<(f64, usize, usize)>> {
    let traj = integrate(sys, x0, t_span, step)?;
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, x)| Ok((t, s_minus(x)?, s_plus(x)?)))
        .collect()
}

/// Thomas' cyclically symmetric system with damping `b > 0` and feedback
/// gain `c` on the first two states:
/// x1' = sin x2 + (c-b) x1, x2' = sin x3 + (c-b) x2, x3' = sin x1 - b x3.
/// `c = 0` is the open loop. The attached state-space box is
/// {x : b*max|x_i| <= 1}.
pub fn thomas_system(b: f64, c: f64) -> Result<SystemDef> {
    if !(b > 0.0) || !b.is_finite() || !c.is_finite() {
        return Err(Error::domain("Thomas system requires finite parameters with b > 0"));
    }
    let region = BoxRegion::symmetric(3, 1.0 / b)?;
    let f = move |_t: f64, x: &[f64]| {
        vec![
            x[1].sin() + (c - b) * x[0],
            x[2].sin() + (c - b) * x[1],
            x[0].sin() - b * x[2],
        ]
    };
    let jacobian = move |_t: f64, x: &[f64]| {
        DenseMatrix::from_rows(&[
            vec![c - b, x[1].cos(), 0.0],
            vec![0.0, c - b, x[2].cos()],
            vec![x[0].cos(), 0.0, -b],
        ])
        .expect("Thomas Jacobian entries are finite")
    };
    Ok(SystemDef::nonlinear(3, Box::new(f), Box::new(jacobian), Some(region)))
}

/// Supremum feedback gain c* = (s(b+1) + 2b - 1) / (1 + s): any gain below
/// it makes the closed-loop Thomas system (2+s)-contracting in the
/// column-sum measure on its state-space box. Requires b > 0 and s in [0, 1).
pub fn thomas_gain_bound(b: f64, s: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain("gain bound requires b > 0"));
    }
    if !(0.0..1.0).contains(&s) {
        return Err(Error::domain("fractional part s must lie in [0, 1)"));
    }
    Ok((s * (b + 1.0) + 2.0 * b - 1.0) / (1.0 + s))
}

/// Two-dimensional linear time-varying demo system with
/// A(t) = [[-1, 0], [-2 cos t, 0]]; it has a known closed-form transition
/// matrix ([`example5_transition`]) and is area-contracting.
pub fn example5_system() -> SystemDef {
    SystemDef::ltv(
        2,
        Box::new(|t: f64| {
            DenseMatrix::from_rows(&[vec![-1.0, 0.0], vec![-2.0 * t.cos(), 0.0]])
                .expect("coefficient entries are finite")
        }),
    )
}

/// Closed-form transition matrix of [`example5_system`]:
/// [[e^-t, 0], [-1 + e^-t (cos t - sin t), 1]].
pub fn example5_transition(t: f64) -> DenseMatrix {
    let e = (-t).exp();
    DenseMatrix::from_rows(&[
        vec![e, 0.0],
        vec![-1.0 + e * (t.cos() - t.sin()), 1.0],
    ])
    .expect("transition entries are finite")
}

/// Constant 3x3 demo matrix [[-1, 1, -2], [0, 1, 0.1], [-3, 0, 1]]; not
/// Metzler, but its second-order additive compound is Metzler and
/// irreducible.
pub fn example8_matrix() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        vec![-1.0, 1.0, -2.0],
        vec![0.0, 1.0, 0.1],
        vec![-3.0, 0.0, 1.0],
    ])
    .expect("constant entries are finite")
}

/// The linear system x' = Ax for [`example8_matrix`].
pub fn example8_system() -> SystemDef {
    SystemDef::ltv(3, Box::new(|_t: f64| example8_matrix()))
}

/// Monotone cyclic feedback demo system in dimension `n >= 3` with feedback
/// sign `delta1` in {-1, +1}:
/// x1' = -x1 + delta1*atan(xn), xi' = atan(x_{i-1}) - xi + atan(x_{i+1}) for
/// 1 < i < n, xn' = atan(x_{n-1}) - xn. Its Jacobian has positive super- and
/// sub-diagonal entries, corner (1, n) of sign delta1, and zeros elsewhere
/// off the diagonal, everywhere in the state space.
pub fn cyclic_system(delta1: f64, n: usize) -> Result<SystemDef> {
    if delta1 != 1.0 && delta1 != -1.0 {
        return Err(Error::domain("feedback sign must be +1 or -1"));
    }
    if n < 3 {
        return Err(Error::domain("cyclic feedback system requires n >= 3"));
    }
    let f = move |_t: f64, x: &[f64]| {
        (0..n)
            .map(|i| {
                if i == 0 {
                    -x[0] + delta1 * x[n - 1].atan()
                } else if i == n - 1 {
                    x[n - 2].atan() - x[n - 1]
                } else {
                    x[i - 1].atan() - x[i] + x[i + 1].atan()
                }
            })
            .collect()
    };
    let jacobian = move |_t: f64, x: &[f64]| {
        let gain = |v: f64| 1.0 / (1.0 + v * v);
        DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                -1.0
            } else if i == 0 && j == n - 1 {
                delta1 * gain(x[n - 1])
            } else if i > 0 && j + 1 == i {
                gain(x[j])
            } else if i > 0 && i < n - 1 && j == i + 1 {
                gain(x[j])
            } else {
                0.0
            }
        })
        .expect("Jacobian entries are finite")
    };
    let region = BoxRegion::symmetric(n, 1.0)?;
    Ok(SystemDef::nonlinear(n, Box::new(f), Box::new(jacobian), Some(region)))
}
