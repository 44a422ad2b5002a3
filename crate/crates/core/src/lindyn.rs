//! Linear stochastic mobility models `ẋ = Ax + w`, `y = Cx`, and the
//! Gaussian location distributions they induce.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::quad::gauss_legendre_cached;

/// Dynamics of one node. `q` is the power spectral density of the white
/// disturbance `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlcModel {
    a: DMatrix<f64>,
    c: DMatrix<f64>,
    q: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub x: DVector<f64>,
    pub s: f64,
}

impl NodeState {
    pub fn new(x: DVector<f64>, s: f64) -> Self {
        NodeState { x, s }
    }
}

/// Location distribution at time `t` given the state at anchor time `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLocation {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub t: f64,
    pub s: f64,
}

impl GaussianLocation {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Zero-mean isotropic location, mostly for tests and closed forms.
    pub fn isotropic(d: usize, variance: f64) -> Self {
        GaussianLocation {
            mu: DVector::zeros(d),
            sigma: DMatrix::identity(d, d) * variance,
            t: 0.0,
            s: 0.0,
        }
    }

    pub fn from_parts(mu: DVector<f64>, sigma: DMatrix<f64>) -> Self {
        GaussianLocation {
            mu,
            sigma,
            t: 0.0,
            s: 0.0,
        }
    }
}

fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

impl GlcModel {
    pub fn new(a: DMatrix<f64>, c: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(invalid(format!("A must be square and non-empty, got {}x{}", a.nrows(), a.ncols())));
        }
        if c.ncols() != n || !(1..=3).contains(&c.nrows()) {
            return Err(invalid(format!(
                "C must be d x {n} with 1 <= d <= 3, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if q.nrows() != n || q.ncols() != n {
            return Err(invalid(format!("Q must be {n}x{n}, got {}x{}", q.nrows(), q.ncols())));
        }
        if !(all_finite(&a) && all_finite(&c) && all_finite(&q)) {
            return Err(invalid("model matrices must be finite"));
        }
        let scale = q.amax().max(1.0);
        if (&q - q.transpose()).amax() > 1e-12 * scale {
            return Err(invalid("Q must be symmetric"));
        }
        let min_eig = q.clone().symmetric_eigenvalues().min();
        if min_eig < -1e-12 * scale {
            return Err(invalid(format!("Q must be positive semidefinite (min eigenvalue {min_eig:e})")));
        }
        Ok(GlcModel { a, c, q })
    }

    /// `d`-dimensional Brownian motion with disturbance power `noise` per axis.
    pub fn brownian(d: usize, noise: f64) -> Result<Self> {
        GlcModel::new(
            DMatrix::zeros(d, d),
            DMatrix::identity(d, d),
            DMatrix::identity(d, d) * noise,
        )
    }

    /// Planar uniform circular motion `ẋ₁ = ωx₂`, `ẋ₂ = −ωx₁` with
    /// disturbance power `noise` per axis.
    pub fn circular_2d(omega: f64, noise: f64) -> Result<Self> {
        GlcModel::new(
            DMatrix::from_row_slice(2, 2, &[0.0, omega, -omega, 0.0]),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2) * noise,
        )
    }

    /// Planar motion with velocity inertia; state `(p₁, v₁, p₂, v₂)`, with the
    /// disturbance acting on the position components.
    pub fn inertia_2d(noise: f64) -> Result<Self> {
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 1)] = 1.0;
        a[(2, 3)] = 1.0;
        let mut c = DMatrix::zeros(2, 4);
        c[(0, 0)] = 1.0;
        c[(1, 2)] = 1.0;
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![noise, 0.0, noise, 0.0]));
        GlcModel::new(a, c, q)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }
}

// Padé coefficients b_j for degrees 3, 5, 7, 9, 13.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [f64; 5] = [
    1.495_585_217_958_292e-2,
    2.539_398_330_063_23e-1,
    9.504_178_996_162_932e-1,
    2.097_847_961_257_068,
    5.371_920_351_148_152,
];

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pade_low(a: &DMatrix<f64>, b: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut u = DMatrix::identity(n, n) * b[1];
    let mut v = DMatrix::identity(n, n) * b[0];
    let mut power = DMatrix::identity(n, n);
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u += &power * b[2 * k + 1];
        v += &power * b[2 * k];
    }
    (a * u, v)
}

fn pade13(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = &PADE13;
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    (u, v)
}

fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = one_norm(a);
    let solve = |(u, v): (DMatrix<f64>, DMatrix<f64>)| {
        let p = &v + &u;
        let q = v - u;
        q.lu().solve(&p).expect("Padé denominator is nonsingular for scaled input")
    };
    for (theta, b) in THETA[..4].iter().zip([&PADE3[..], &PADE5[..], &PADE7[..], &PADE9[..]]) {
        if norm <= *theta {
            return solve(pade_low(a, b));
        }
    }
    let s = if norm > THETA[4] {
        (norm / THETA[4]).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s);
    let mut x = solve(pade13(&scaled));
    for _ in 0..s {
        x = &x * &x;
    }
    x
}

/// `exp(A·dt)` by scaling and squaring with Padé approximants.
pub fn matrix_exponential(a: &DMatrix<f64>, dt: f64) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(invalid(format!("matrix_exponential needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    if !dt.is_finite() || !all_finite(a) {
        return Err(invalid("matrix_exponential needs finite input"));
    }
    Ok(expm(&(a * dt)))
}

/// Transition matrix and accumulated noise covariance over an interval of
/// length `dt ≥ 0`: `(e^{A dt}, ∫₀^{dt} e^{Aτ} Q e^{Aᵀτ} dτ)`.
pub fn transition_and_noise(model: &GlcModel, dt: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(invalid(format!("interval length must be finite and >= 0, got {dt}")));
    }
    let n = model.state_dim();
    if dt == 0.0 {
        return Ok((DMatrix::identity(n, n), DMatrix::zeros(n, n)));
    }
    // Van Loan on a short step, then doubling so the −A block never has to
    // be exponentiated over a long horizon.
    let norm = one_norm(&model.a).max(one_norm(&model.q).sqrt().min(1.0));
    let mut k = 0;
    let mut h = dt;
    while norm * h > 1.0 && k < 60 {
        h *= 0.5;
        k += 1;
    }
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(-&model.a));
    block.view_mut((0, n), (n, n)).copy_from(&model.q);
    block.view_mut((n, n), (n, n)).copy_from(&model.a.transpose());
    let e = expm(&(block * h));
    let e12 = e.view((0, n), (n, n)).into_owned();
    let e22 = e.view((n, n), (n, n)).into_owned();
    let mut phi = e22.transpose();
    let mut theta = &phi * e12;
    theta = symmetrize(&theta);
    for _ in 0..k {
        theta = symmetrize(&(&theta + &phi * &theta * phi.transpose()));
        phi = &phi * &phi;
    }
    Ok((phi, theta))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// State covariance `Θ(t)` accumulated from the disturbance since `s`.
pub fn state_covariance_theta(model: &GlcModel, s: f64, t: f64) -> Result<DMatrix<f64>> {
    if !(t >= s) {
        return Err(invalid(format!("prediction time t = {t} precedes anchor s = {s}")));
    }
    Ok(transition_and_noise(model, t - s)?.1)
}

/// Independent evaluation of `Θ(t)` by composite Gauss–Legendre quadrature
/// of its defining integral, refined until two successive panel counts
/// agree to `tol` (absolute, entrywise).
pub fn state_covariance_theta_quadrature(model: &GlcModel, s: f64, t: f64, tol: f64) -> Result<DMatrix<f64>> {
    if !(t >= s) {
        return Err(invalid(format!("prediction time t = {t} precedes anchor s = {s}")));
    }
    let n = model.state_dim();
    let dt = t - s;
    if dt == 0.0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let (x, w) = gauss_legendre_cached(16);
    let integrate = |panels: usize| -> Result<DMatrix<f64>> {
        let width = dt / panels as f64;
        let mut acc = DMatrix::zeros(n, n);
        for p in 0..panels {
            let lo = p as f64 * width;
            for (xi, wi) in x.iter().zip(w) {
                let tau = lo + 0.5 * width * (xi + 1.0);
                let e = matrix_exponential(&model.a, tau)?;
                acc += (&e * &model.q * e.transpose()) * (0.5 * width * wi);
            }
        }
        Ok(acc)
    };
    let mut panels = 1;
    let mut prev = integrate(panels)?;
    loop {
        panels *= 2;
        let next = integrate(panels)?;
        let diff = (&next - &prev).amax();
        if diff <= tol || panels >= 1 << 14 {
            if diff > tol {
                return Err(Error::SeriesDivergence {
                    terms: panels,
                    last_increment: diff,
                });
            }
            return Ok(symmetrize(&next));
        }
        prev = next;
    }
}

/// Mean `C e^{A(t−s)} x(s)` and covariance `C Θ(t) Cᵀ` of a node location.
pub fn predict_node_distribution(model: &GlcModel, state: &NodeState, t: f64) -> Result<GaussianLocation> {
    if state.x.len() != model.state_dim() {
        return Err(invalid(format!(
            "state has length {}, model expects {}",
            state.x.len(),
            model.state_dim()
        )));
    }
    if !(t >= state.s) {
        return Err(invalid(format!("prediction time t = {t} precedes anchor s = {}", state.s)));
    }
    let (phi, theta) = transition_and_noise(model, t - state.s)?;
    let mu = &model.c * (phi * &state.x);
    let sigma = symmetrize(&(&model.c * theta * model.c.transpose()));
    Ok(GaussianLocation {
        mu,
        sigma,
        t,
        s: state.s,
    })
}

/// Location of an interferer relative to the (moving) reference node.
pub fn relative_distribution(
    interferer: (&GlcModel, &NodeState),
    reference: (&GlcModel, &NodeState),
    t: f64,
) -> Result<GaussianLocation> {
    if interferer.1.s != reference.1.s {
        return Err(invalid(format!(
            "anchor times differ: interferer s = {}, reference s = {}",
            interferer.1.s, reference.1.s
        )));
    }
    if interferer.0.output_dim() != reference.0.output_dim() {
        return Err(invalid(format!(
            "output dimensions differ: {} vs {}",
            interferer.0.output_dim(),
            reference.0.output_dim()
        )));
    }
    let li = predict_node_distribution(interferer.0, interferer.1, t)?;
    let l0 = predict_node_distribution(reference.0, reference.1, t)?;
    Ok(GaussianLocation {
        mu: li.mu - l0.mu,
        sigma: li.sigma + l0.sigma,
        t,
        s: interferer.1.s,
    })
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> bool {
    a.shape() == b.shape()
        && a
            .iter()
            .zip(b.iter())
            .all(|(x, y)| (x - y).abs() <= rel_tol * x.abs().max(y.abs()))
}

/// True iff every model has the same `(A, C, Q)` up to `rel_tol`.
pub fn check_homogeneous(models: &[&GlcModel], rel_tol: f64) -> bool {
    let Some(first) = models.first() else {
        return true;
    };
    models[1..].iter().all(|m| {
        close(&first.a, &m.a, rel_tol) && close(&first.c, &m.c, rel_tol) && close(&first.q, &m.q, rel_tol)
    })
}

pub const DEFAULT_HOMOGENEITY_TOL: f64 = 1e-12;
