//! Expectations `G[ν] = E[ν(‖y‖)]` of a radial function of a Gaussian
//! location `y ~ N(μ, Σ)`, evaluated three ways: adaptive radial
//! quadrature (general), a Taylor-series expansion (d ≤ 2), and closed forms
//! for zero-mean isotropic locations.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::lindyn::GaussianLocation;
use crate::quad::{gauss_legendre_cached, integrate, QuadConfig};
use crate::specfun::{
    bessel_i0e, cosine_integral, gauss_2f1, ln_gamma, sine_integral,
    upper_incomplete_gamma_scaled,
};

/// Path loss `g(r) = 1/(ε + r^α)`; `ε = 0` is the singular model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub eps: f64,
    pub alpha: f64,
}

impl PathLoss {
    pub fn new(eps: f64, alpha: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(invalid(format!("path loss eps must be finite and >= 0, got {eps}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("path loss alpha must be finite and > 0, got {alpha}")));
        }
        Ok(PathLoss { eps, alpha })
    }

    pub fn g(&self, r: f64) -> f64 {
        1.0 / (self.eps + r.powf(self.alpha))
    }

    /// Supremum of `g` over `r ≥ 0`.
    pub fn sup(&self) -> f64 {
        1.0 / self.eps
    }

    /// Radius where `r^α` reaches `ε`, the knee of `g`.
    fn knee(&self) -> Option<f64> {
        (self.eps > 0.0).then(|| self.eps.powf(1.0 / self.alpha))
    }
}

/// Multiplicative power gain of each link. Nakagami-m gains are
/// Gamma(m, rate m) distributed with unit mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    None,
    Nakagami { m: f64 },
}

impl FadingModel {
    pub fn nakagami(m: f64) -> Result<Self> {
        if !(m >= 0.5 && m.is_finite()) {
            return Err(invalid(format!("Nakagami shape must be finite and >= 0.5, got {m}")));
        }
        Ok(FadingModel::Nakagami { m })
    }

    /// `E[h²]`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            FadingModel::None => 1.0,
            FadingModel::Nakagami { m } => (m + 1.0) / m,
        }
    }

    pub fn variance(&self) -> f64 {
        self.second_moment() - 1.0
    }
}

/// The radial function `ν`.
#[derive(Clone)]
pub enum Integrand {
    /// `ν ≡ 1`.
    Unit,
    /// `ν = g`.
    PathLossMean(PathLoss),
    /// `ν = g²`.
    PathLossSquare(PathLoss),
    /// `ν = (m/(m − βg))^m`, the per-link MGF factor under Nakagami fading.
    NakagamiMgf { pathloss: PathLoss, beta: f64, m: f64 },
    /// `ν = e^{βg}`, the per-link MGF factor without fading.
    ExpMgf { pathloss: PathLoss, beta: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrand::Unit => write!(f, "Unit"),
            Integrand::PathLossMean(p) => write!(f, "PathLossMean({p:?})"),
            Integrand::PathLossSquare(p) => write!(f, "PathLossSquare({p:?})"),
            Integrand::NakagamiMgf { pathloss, beta, m } => {
                write!(f, "NakagamiMgf({pathloss:?}, beta = {beta}, m = {m})")
            }
            Integrand::ExpMgf { pathloss, beta } => write!(f, "ExpMgf({pathloss:?}, beta = {beta})"),
            Integrand::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Integrand {
    pub fn nakagami_mgf(pathloss: PathLoss, beta: f64, m: f64) -> Result<Self> {
        check_mgf_domain(&pathloss, beta, m)?;
        Ok(Integrand::NakagamiMgf { pathloss, beta, m })
    }

    pub fn exp_mgf(pathloss: PathLoss, beta: f64) -> Result<Self> {
        if beta > 0.0 && pathloss.eps == 0.0 {
            return Err(Error::MgfDomain { beta, bound: 0.0 });
        }
        Ok(Integrand::ExpMgf { pathloss, beta })
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Integrand::Custom(Arc::new(f))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Integrand::Unit => 1.0,
            Integrand::PathLossMean(p) => p.g(r),
            Integrand::PathLossSquare(p) => p.g(r).powi(2),
            Integrand::NakagamiMgf { pathloss, beta, m } => {
                if *beta == 0.0 {
                    return 1.0;
                }
                (m / (m - beta * pathloss.g(r))).powf(*m)
            }
            Integrand::ExpMgf { pathloss, beta } => {
                if *beta == 0.0 {
                    return 1.0;
                }
                (beta * pathloss.g(r)).exp()
            }
            Integrand::Custom(f) => f(r),
        }
    }

    fn pathloss(&self) -> Option<&PathLoss> {
        match self {
            Integrand::PathLossMean(p) | Integrand::PathLossSquare(p) => Some(p),
            Integrand::NakagamiMgf { pathloss, .. } | Integrand::ExpMgf { pathloss, .. } => Some(pathloss),
            _ => None,
        }
    }

    /// Order `p` of a `r^{−p}` singularity at the origin, if any.
    fn singular_order(&self) -> Option<f64> {
        match self {
            Integrand::PathLossMean(p) if p.eps == 0.0 => Some(p.alpha),
            Integrand::PathLossSquare(p) if p.eps == 0.0 => Some(2.0 * p.alpha),
            _ => None,
        }
    }
}

fn check_mgf_domain(pathloss: &PathLoss, beta: f64, m: f64) -> Result<()> {
    if !beta.is_finite() {
        return Err(invalid(format!("beta must be finite, got {beta}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(invalid(format!("Nakagami shape must be positive, got {m}")));
    }
    let bound = m * pathloss.eps;
    if beta >= bound && beta > 0.0 {
        return Err(Error::MgfDomain { beta, bound });
    }
    Ok(())
}

/// A Gaussian location in its principal axes: `η = Pᵀμ`,
/// `PᵀΣP = diag(σ_a²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalizedGaussian {
    pub eta: DVector<f64>,
    pub sigma_axes: DVector<f64>,
    pub p: DMatrix<f64>,
    pub det_sigma: f64,
}

impl DiagonalizedGaussian {
    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    fn sigma_max(&self) -> f64 {
        self.sigma_axes.max()
    }

    fn sigma_min(&self) -> f64 {
        self.sigma_axes.min()
    }
}

/// Eigen-decomposition of `Σ`, axes sorted by decreasing σ, each
/// eigenvector's first nonzero component positive.
pub fn diagonalize(loc: &GaussianLocation) -> Result<DiagonalizedGaussian> {
    let d = loc.dim();
    if d == 0 || loc.sigma.shape() != (d, d) {
        return Err(invalid(format!(
            "covariance shape {:?} does not match mean length {d}",
            loc.sigma.shape()
        )));
    }
    if !loc.sigma.iter().chain(loc.mu.iter()).all(|v| v.is_finite()) {
        return Err(invalid("location has non-finite entries"));
    }
    let eig = SymmetricEigen::new(loc.sigma.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let max_eig = eig.eigenvalues[order[0]];
    let min_eig = eig.eigenvalues[order[d - 1]];
    if !(max_eig > 0.0) || min_eig < 1e-14 * max_eig {
        return Err(Error::DegenerateCovariance { min_eig, max_eig });
    }
    let mut p = DMatrix::zeros(d, d);
    let mut sigma_axes = DVector::zeros(d);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v = -v;
            }
        }
        p.set_column(col, &v);
        sigma_axes[col] = eig.eigenvalues[k].sqrt();
    }
    let eta = p.transpose() * &loc.mu;
    let det_sigma = sigma_axes.iter().map(|s| s * s).product();
    Ok(DiagonalizedGaussian {
        eta,
        sigma_axes,
        p,
        det_sigma,
    })
}

/// Angular integral `A(r) = ∫_{S^{d−1}} f(r u) dS(u)` of the location
/// density, so that `G[ν] = ∫₀^∞ ν(r) A(r) r^{d−1} dr`.
struct AngularKernel {
    d: usize,
    eta: Vec<f64>,
    sig: Vec<f64>,
    eta_norm: f64,
    isotropic: bool,
    log_norm: f64,
}

impl AngularKernel {
    fn new(diag: &DiagonalizedGaussian) -> Self {
        let d = diag.dim();
        let sig: Vec<f64> = diag.sigma_axes.iter().copied().collect();
        let isotropic = diag.sigma_max() / diag.sigma_min() - 1.0 < 1e-12;
        let log_norm =
            -0.5 * d as f64 * (2.0 * PI).ln() - sig.iter().map(|s| s.ln()).sum::<f64>();
        AngularKernel {
            d,
            eta: diag.eta.iter().copied().collect(),
            sig,
            eta_norm: diag.eta.norm(),
            isotropic,
            log_norm,
        }
    }

    fn density(&self, y: &[f64]) -> f64 {
        let q: f64 = y
            .iter()
            .zip(&self.eta)
            .zip(&self.sig)
            .map(|((y, e), s)| ((y - e) / s).powi(2))
            .sum();
        (self.log_norm - 0.5 * q).exp()
    }

    /// `abs` is an absolute error floor for the anisotropic rules.
    fn eval(&self, r: f64, rel: f64, abs: f64) -> f64 {
        if self.isotropic {
            let s2 = self.sig[0] * self.sig[0];
            let eta = self.eta_norm;
            return match self.d {
                1 => self.density(&[r]) + self.density(&[-r]),
                2 => (-(r - eta).powi(2) / (2.0 * s2)).exp() * bessel_i0e(r * eta / s2) / s2,
                _ => {
                    let k = r * eta / s2;
                    let shape = if k < 1e-8 { 1.0 - k } else { -(-2.0 * k).exp_m1() / (2.0 * k) };
                    4.0 * PI * (2.0 * PI * s2).powf(-1.5) * (-(r - eta).powi(2) / (2.0 * s2)).exp() * shape
                }
            };
        }
        match self.d {
            1 => self.density(&[r]) + self.density(&[-r]),
            2 => self.circle(r, rel, abs),
            _ => self.sphere(r, rel, abs),
        }
    }

    fn circle(&self, r: f64, rel: f64, abs: f64) -> f64 {
        let f = |phi: f64| self.density(&[r * phi.cos(), r * phi.sin()]);
        let mut n = 16usize;
        let mut sum: f64 = (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).sum();
        let mut est = 2.0 * PI * sum / n as f64;
        while n < 1 << 16 {
            let mids: f64 = (0..n).map(|k| f(2.0 * PI * (k as f64 + 0.5) / n as f64)).sum();
            sum += mids;
            n *= 2;
            let next = 2.0 * PI * sum / n as f64;
            let done = (next - est).abs() <= rel * 0.1 * next.abs() + abs;
            est = next;
            if done && n >= 64 {
                break;
            }
        }
        est
    }

    /// Direction of the density maximum on the sphere of radius `r`:
    /// `u_a = rη_a/(r² + λσ_a²)` with `λ` fixed by `‖u‖ = 1`.
    fn peak_direction(&self, r: f64) -> [f64; 3] {
        let s2: Vec<f64> = self.sig.iter().map(|s| s * s).collect();
        let u = |lam: f64| -> [f64; 3] { std::array::from_fn(|a| r * self.eta[a] / (r * r + lam * s2[a])) };
        let h = |lam: f64| u(lam).iter().map(|x| x * x).sum::<f64>();
        // σ₀ is the largest axis, so λ > −r²/σ₀² keeps every denominator positive.
        let floor = -r * r / s2[0];
        let mut lo = floor;
        let mut hi = 1.0f64.max(r * r / s2[2]);
        while h(hi) > 1.0 {
            hi *= 4.0;
        }
        if h(floor * (1.0 - 1e-12)) <= 1.0 {
            // Degenerate case: the maximum lies off the first axis' pole.
            let mut v = u(floor);
            v[0] = (1.0 - v[1] * v[1] - v[2] * v[2]).max(0.0).sqrt();
            return v;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = u(hi);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.map(|x| x / n)
    }

    /// Gauss–Legendre in the polar angle times trapezoid in azimuth, with the
    /// pole turned towards the density peak so that both rules resolve it.
    fn sphere(&self, r: f64, rel: f64, abs: f64) -> f64 {
        if r == 0.0 {
            return 4.0 * PI * self.density(&[0.0; 3]);
        }
        let pole = nalgebra::Vector3::from(self.peak_direction(r));
        let helper = if pole.x.abs() < 0.6 {
            nalgebra::Vector3::x()
        } else {
            nalgebra::Vector3::y()
        };
        let e2 = (helper - pole * pole.dot(&helper)).normalize();
        let e3 = pole.cross(&e2);
        let inv: Vec<f64> = self.sig.iter().map(|s| 1.0 / s).collect();
        let point = |t: f64, st: f64, phi: f64| -> f64 {
            let (sp, cp) = phi.sin_cos();
            let mut q = 0.0;
            for a in 0..3 {
                let y = r * (t * pole[a] + st * (cp * e2[a] + sp * e3[a]));
                let z = (y - self.eta[a]) * inv[a];
                q += z * z;
            }
            (self.log_norm - 0.5 * q).exp()
        };
        // Rings only need accuracy relative to the whole sphere, `floor`.
        let ring = |t: f64, floor: f64| -> f64 {
            let st = (1.0 - t * t).max(0.0).sqrt();
            let mut n = 8usize;
            let mut sum: f64 = (0..n).map(|k| point(t, st, 2.0 * PI * k as f64 / n as f64)).sum();
            let mut est = 2.0 * PI * sum / n as f64;
            while n < 1 << 14 {
                let mids: f64 = (0..n).map(|k| point(t, st, 2.0 * PI * (k as f64 + 0.5) / n as f64)).sum();
                sum += mids;
                n *= 2;
                let next = 2.0 * PI * sum / n as f64;
                let done = (next - est).abs() <= (rel * 0.1 * next.abs()).max(floor);
                est = next;
                if done && n >= 16 {
                    break;
                }
            }
            est
        };
        let eval = |n: usize, floor: f64| -> f64 {
            let (x, w) = gauss_legendre_cached(n);
            x.iter().zip(w).map(|(t, wt)| wt * ring(*t, floor)).sum()
        };
        let mut n = 16;
        let mut prev = eval(n, abs / 4.0);
        while n < 2048 {
            n *= 2;
            let next = eval(n, (0.05 * rel * prev.abs()).max(abs / 4.0));
            if (next - prev).abs() <= rel * next.abs() + abs {
                return next;
            }
            prev = next;
        }
        prev
    }
}

/// Quadrature value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOutcome {
    pub value: f64,
    pub abs_err: f64,
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(d))
    }
}

/// `G[ν]` by adaptive Gauss–Kronrod integration of the radial form, with
/// the angular integral done analytically (isotropic Σ) or by spectrally
/// convergent rules (anisotropic Σ).
pub fn eval_quadrature_detailed(nu: &Integrand, loc: &GaussianLocation) -> Result<QuadratureOutcome> {
    let d = loc.dim();
    check_dim(d)?;
    let diag = diagonalize(loc)?;
    let kernel = AngularKernel::new(&diag);
    let smax = diag.sigma_max();
    let smin = diag.sigma_min();
    let eta = kernel.eta_norm;
    let upper = eta + 12.0 * smax;
    let df = d as f64;

    let mut points = vec![];
    if let Some(knee) = nu.pathloss().and_then(|p| p.knee()) {
        points.extend([knee / 8.0, knee, 8.0 * knee]);
    }
    for k in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
        points.push(eta + k * smax);
        points.push(eta + k * smin);
    }

    let mut head = 0.0;
    let mut lower = 0.0;
    if let Some(p) = nu.singular_order() {
        if p >= df {
            return Err(Error::Divergence(format!(
                "singular path loss (eps = 0) with exponent {p} >= d = {d}: E[g] is infinite at r = 0"
            )));
        }
        // ν = r^{−p} exactly; the density is flat on [0, δ].
        let delta = 1e-6 * smin;
        head = kernel.eval(0.0, 1e-13, 1e-300) * delta.powf(df - p) / (df - p);
        lower = delta;
        let mut r = delta;
        while r < smin {
            r *= 2.0;
            points.push(r);
        }
    }
    points.retain(|&r| r > lower && r < upper);
    points.push(lower);
    points.push(upper);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * upper);

    let radial = |rel: f64, floor: &dyn Fn(f64) -> f64| {
        integrate(
            |r| {
                if r == 0.0 && d > 1 {
                    return 0.0;
                }
                let w = nu.eval(r) * r.powi(d as i32 - 1);
                w * kernel.eval(r, rel, floor(w))
            },
            &points,
            QuadConfig {
                rel_tol: rel,
                abs_tol: 0.0,
                max_intervals: 4000,
            },
        )
    };
    // The spherical rule is costly at full relative accuracy in the tails, so a
    // coarse pass first sizes G and the fine pass only asks each radius for
    // what it contributes: Σ_r ν r^{d−1} · floor stays below 1e-14 · G.
    let res = if d == 3 && !kernel.isotropic {
        let rough = (head + radial(1e-7, &|_| 1e-300).value).abs();
        let budget = 1e-14 * rough / upper;
        radial(1e-12, &|w: f64| (budget / w).max(1e-300))
    } else {
        radial(1e-12, &|_| 1e-300)
    };
    let value = head + res.value;
    if !value.is_finite() {
        return Err(Error::Divergence(format!("quadrature produced {value} for {nu:?}")));
    }
    if res.abs_err > 1e-8 * value.abs() {
        log::warn!(
            "radial quadrature for {nu:?} reached error estimate {:e} (value {value:e})",
            res.abs_err
        );
    }
    Ok(QuadratureOutcome {
        value,
        abs_err: res.abs_err,
    })
}

pub fn eval_quadrature(nu: &Integrand, loc: &GaussianLocation) -> Result<f64> {
    eval_quadrature_detailed(nu, loc).map(|o| o.value)
}

/// Truncation of the series form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControls {
    pub n_max: usize,
    /// Radial cutoff; `None` selects `‖η‖ + 4·max σ_a`.
    pub r: Option<f64>,
    pub tol: f64,
}

impl Default for SeriesControls {
    fn default() -> Self {
        SeriesControls {
            n_max: 40,
            r: None,
            tol: 1e-10,
        }
    }
}

// ∫₀^R r^c (b + r^α)^{−j} dr
fn psi_power(c: u32, b: f64, j: u32, alpha: f64, r: f64) -> Result<f64> {
    let c1 = c as f64 + 1.0;
    if j == 0 {
        return Ok(r.powf(c1) / c1);
    }
    if b == 0.0 {
        let e = c1 - j as f64 * alpha;
        if e <= 0.0 {
            return Err(Error::Divergence(format!(
                "radial integral of r^{c} r^(-{}) diverges at r = 0",
                j as f64 * alpha
            )));
        }
        return Ok(r.powf(e) / e);
    }
    if b < 0.0 {
        return Err(Error::ParameterDegeneracy(format!(
            "integrand r^{c}/(b + r^alpha)^{j} has a pole on the real axis (b = {b})"
        )));
    }
    let p = c1 / alpha;
    let f = gauss_2f1(j as f64, p, p + 1.0, -r.powf(alpha) / b)
        .map_err(|e| Error::FallbackNeeded(format!("hypergeometric evaluation failed: {e}")))?;
    Ok(b.powi(-(j as i32)) * r.powf(c1) / c1 * f)
}

/// `∫₀^R r^c g(r) dr`.
pub fn psi_mean(c: u32, pl: &PathLoss, r: f64) -> Result<f64> {
    check_radius(r)?;
    psi_power(c, pl.eps, 1, pl.alpha, r)
}

/// `∫₀^R r^c g(r)² dr`.
pub fn psi_square(c: u32, pl: &PathLoss, r: f64) -> Result<f64> {
    check_radius(r)?;
    psi_power(c, pl.eps, 2, pl.alpha, r)
}

/// `∫₀^R r^c (m/(m − βg(r)))^m dr` for integer `m`, expanding
/// `(1 + (β/m)/(b + r^α))^m` with `b = ε − β/m` binomially.
pub fn psi_mgf(c: u32, pl: &PathLoss, beta: f64, m: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    if beta == 0.0 {
        return psi_power(c, 0.0, 0, pl.alpha, r);
    }
    if beta == m * pl.eps {
        return Err(Error::ParameterDegeneracy(format!(
            "beta = m * eps = {beta}: the MGF integrand is unbounded"
        )));
    }
    check_mgf_domain(pl, beta, m)?;
    if m != m.round() || m < 1.0 {
        return Err(Error::FallbackNeeded(format!(
            "closed radial integral needs integer Nakagami m, got {m}"
        )));
    }
    let mi = m as u32;
    let b = pl.eps - beta / m;
    let q = beta / m;
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=mi {
        if j > 0 {
            binom *= (mi - j + 1) as f64 / j as f64;
        }
        total += binom * q.powi(j as i32) * psi_power(c, b, j, pl.alpha, r)?;
    }
    Ok(total)
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("radial cutoff must be finite and > 0, got {r}")))
    }
}

fn psi_numeric(nu: &Integrand, c: u32, r: f64) -> Result<f64> {
    let mut points = vec![0.0, r];
    if let Some(knee) = nu.pathloss().and_then(|p| p.knee()) {
        points.extend([knee / 8.0, knee, 8.0 * knee].into_iter().filter(|&k| k < r));
    }
    points.sort_by(f64::total_cmp);
    let res = integrate(|x| nu.eval(x) * x.powi(c as i32), &points, QuadConfig::default());
    if !res.value.is_finite() {
        return Err(Error::Divergence(format!("radial integral of {nu:?} times r^{c}")));
    }
    Ok(res.value)
}

fn psi(nu: &Integrand, c: u32, r: f64) -> Result<f64> {
    match nu {
        Integrand::Unit => psi_power(c, 0.0, 0, 1.0, r),
        Integrand::PathLossMean(p) => psi_mean(c, p, r),
        Integrand::PathLossSquare(p) => psi_square(c, p, r),
        Integrand::NakagamiMgf { pathloss, beta, m } => match psi_mgf(c, pathloss, *beta, *m, r) {
            Err(Error::FallbackNeeded(_)) => psi_numeric(nu, c, r),
            other => other,
        },
        _ => psi_numeric(nu, c, r),
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

// ∫₀^{2π} cos^p φ sin^q φ dφ
fn angular_moment(p: usize, q: usize) -> f64 {
    if p % 2 == 1 || q % 2 == 1 {
        return 0.0;
    }
    let ln = ln_gamma((p as f64 + 1.0) / 2.0).unwrap() + ln_gamma((q as f64 + 1.0) / 2.0).unwrap()
        - ln_gamma((p + q) as f64 / 2.0 + 1.0).unwrap();
    2.0 * ln.exp()
}

/// Angular coefficient of the `(k₁, k₂, k₃)` term of the series form:
/// `∫_{S^{d−1}} (uᵀDu)^{k₁} (−2ηᵀDu)^{k₂} (ηᵀDη)^{k₃} dS(u)` with
/// `D = diag(1/σ_a²)`.
pub fn omega(diag: &DiagonalizedGaussian, k1: usize, k2: usize, k3: usize) -> Result<f64> {
    let d = diag.dim();
    let inv: Vec<f64> = diag.sigma_axes.iter().map(|s| 1.0 / (s * s)).collect();
    let lin: Vec<f64> = diag.eta.iter().zip(&inv).map(|(e, i)| -2.0 * e * i).collect();
    let quad: f64 = diag.eta.iter().zip(&inv).map(|(e, i)| e * e * i).sum();
    let c3 = quad.powi(k3 as i32);
    match d {
        1 => {
            let parity = if k2 % 2 == 0 { 2.0 } else { 0.0 };
            Ok(inv[0].powi(k1 as i32) * lin[0].powi(k2 as i32) * c3 * parity)
        }
        2 => {
            if c3 == 0.0 && k3 > 0 {
                return Ok(0.0);
            }
            let mut total = 0.0;
            for a1 in 0..=k1 {
                let wa = binomial(k1, a1) * inv[0].powi(a1 as i32) * inv[1].powi((k1 - a1) as i32);
                for a2 in 0..=k2 {
                    let p = 2 * a1 + a2;
                    let q = 2 * (k1 - a1) + (k2 - a2);
                    if p % 2 == 1 || q % 2 == 1 {
                        continue;
                    }
                    let wb = binomial(k2, a2) * lin[0].powi(a2 as i32) * lin[1].powi((k2 - a2) as i32);
                    if wb == 0.0 {
                        continue;
                    }
                    total += wa * wb * angular_moment(p, q);
                }
            }
            Ok(total * c3)
        }
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// `G[ν]` by the Taylor-series form: the Gaussian density is expanded in
/// powers of `r`, giving radial integrals `Ψ(c) = ∫₀^R ν(r) r^c dr` and
/// angular coefficients [`omega`].
pub fn eval_series(nu: &Integrand, diag: &DiagonalizedGaussian, ctl: &SeriesControls) -> Result<f64> {
    let d = diag.dim();
    if d > 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    if ctl.n_max < 1 || !(ctl.tol > 0.0) {
        return Err(invalid("series controls need n_max >= 1 and tol > 0"));
    }
    let smax = diag.sigma_max();
    let r = ctl.r.unwrap_or(diag.eta.norm() + 4.0 * smax);
    check_radius(r)?;
    // Work in units of σ_max so the powers of 1/σ² stay O(1).
    let scaled = DiagonalizedGaussian {
        eta: &diag.eta / smax,
        sigma_axes: &diag.sigma_axes / smax,
        p: diag.p.clone(),
        det_sigma: diag.det_sigma / smax.powi(2 * d as i32),
    };
    let centered = diag.eta.iter().all(|&e| e == 0.0);
    let mut psi_cache: Vec<Option<f64>> = vec![None; 2 * ctl.n_max + d + 2];
    let mut psi_scaled = |c: usize| -> Result<f64> {
        if let Some(v) = psi_cache[c] {
            return Ok(v);
        }
        let v = psi(nu, c as u32, r)? / smax.powi(c as i32 + 1);
        psi_cache[c] = Some(v);
        Ok(v)
    };
    let prefactor = 1.0 / ((2.0 * PI).powf(d as f64 / 2.0) * scaled.det_sigma.sqrt());
    let mut sum = 0.0;
    let mut small = 0;
    let mut last = f64::NAN;
    for n in 0..ctl.n_max {
        let mut term = 0.0;
        for k1 in 0..=n {
            for k2 in 0..=(n - k1) {
                let k3 = n - k1 - k2;
                if centered && (k2 > 0 || k3 > 0) {
                    continue;
                }
                let om = omega(&scaled, k1, k2, k3)?;
                if om == 0.0 {
                    continue;
                }
                let coef = om / (factorial(k1) * factorial(k2) * factorial(k3));
                term += coef * psi_scaled(2 * k1 + k2 + d - 1)?;
            }
        }
        term *= prefactor * (-0.5f64).powi(n as i32);
        sum += term;
        last = term;
        if term.abs() <= ctl.tol * sum.abs() {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::SeriesDivergence {
        terms: ctl.n_max,
        last_increment: last,
    })
}

/// Common variance `σ²` when `μ = 0` and `Σ = σ²I` to 1e-10.
pub fn isotropic_variance(loc: &GaussianLocation) -> Option<f64> {
    let d = loc.dim();
    if d == 0 {
        return None;
    }
    let s2 = loc.sigma.trace() / d as f64;
    if !(s2 > 0.0) {
        return None;
    }
    let iso = (&loc.sigma - DMatrix::identity(d, d) * s2).amax() <= 1e-10 * s2;
    let centered = loc.mu.amax() <= 1e-10 * s2.sqrt();
    (iso && centered).then_some(s2)
}

fn closed_precheck(loc: &GaussianLocation, d: usize) -> Result<f64> {
    check_dim(d)?;
    if loc.dim() != d {
        return Err(invalid(format!("location has dimension {}, expected {d}", loc.dim())));
    }
    isotropic_variance(loc).ok_or_else(|| {
        Error::UnsupportedBranch("closed forms need a zero mean and isotropic covariance".into())
    })
}

/// Closed-form `E[g(‖y‖)]` for `y ~ N(0, σ²I_d)`.
pub fn closed_first_moment(loc: &GaussianLocation, pl: &PathLoss, d: usize) -> Result<f64> {
    let s2 = closed_precheck(loc, d)?;
    let df = d as f64;
    let (eps, alpha) = (pl.eps, pl.alpha);
    if eps == 0.0 {
        if alpha >= df {
            return Err(Error::Divergence(format!(
                "singular path loss (eps = 0) with alpha = {alpha} >= d = {d}: Gamma((d - alpha)/2) has a pole"
            )));
        }
        let ln = ln_gamma((df - alpha) / 2.0)? - ln_gamma(df / 2.0)?;
        return Ok(ln.exp() / (2f64.powf(alpha / 2.0) * s2.powf(alpha / 2.0)));
    }
    if alpha == 2.0 {
        let p = 1.0 / (2.0 * s2);
        let s = df / 2.0;
        let a = p * eps;
        return Ok(p.powf(s) * eps.powf(s - 1.0) * upper_incomplete_gamma_scaled(1.0 - s, a)?);
    }
    if alpha == 4.0 && d == 2 {
        let x = eps.sqrt() / (2.0 * s2);
        let num = 2.0 * cosine_integral(x)? * x.sin() + x.cos() * (PI - 2.0 * sine_integral(x)?);
        return Ok(num / (4.0 * eps.sqrt() * s2));
    }
    Err(Error::UnsupportedBranch(format!(
        "no closed first moment for eps = {eps}, alpha = {alpha}, d = {d}"
    )))
}

/// Closed-form `E[h²] E[g(‖y‖)²]` for `y ~ N(0, σ²I_d)`.
pub fn closed_second_moment(loc: &GaussianLocation, pl: &PathLoss, fading: &FadingModel, d: usize) -> Result<f64> {
    let s2 = closed_precheck(loc, d)?;
    let df = d as f64;
    let (eps, alpha) = (pl.eps, pl.alpha);
    let g2 = if eps == 0.0 {
        if 2.0 * alpha >= df {
            return Err(Error::Divergence(format!(
                "singular path loss (eps = 0) with 2 alpha = {} >= d = {d}: E[g^2] is infinite",
                2.0 * alpha
            )));
        }
        let ln = ln_gamma((df - 2.0 * alpha) / 2.0)? - ln_gamma(df / 2.0)?;
        ln.exp() / (2f64.powf(alpha) * s2.powf(alpha))
    } else if alpha == 2.0 {
        let p = 1.0 / (2.0 * s2);
        let s = df / 2.0;
        let a = p * eps;
        p / eps - p.powf(s) * eps.powf(s - 2.0) * upper_incomplete_gamma_scaled(1.0 - s, a)? * (s - 1.0 + a)
    } else {
        return Err(Error::UnsupportedBranch(format!(
            "no closed second moment for eps = {eps}, alpha = {alpha}, d = {d}"
        )));
    };
    Ok(fading.second_moment() * g2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Composite Simpson on a fine uniform grid; an oracle independent of the
    // adaptive Gauss–Kronrod code.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn loc(mu: &[f64], sigma: &[f64]) -> GaussianLocation {
        let d = mu.len();
        GaussianLocation::from_parts(DVector::from_row_slice(mu), DMatrix::from_row_slice(d, d, sigma))
    }

    #[test]
    fn diagonalize_examples() {
        let g = diagonalize(&GaussianLocation::isotropic(2, 20.0)).unwrap();
        assert_eq!(g.eta, DVector::zeros(2));
        assert!((g.sigma_axes[0] - 20f64.sqrt()).abs() < 1e-14);
        let g = diagonalize(&loc(&[2.0, 3.0], &[4.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((g.eta[0] - 2.0).abs() < 1e-14 && (g.eta[1] - 3.0).abs() < 1e-14);
        assert!((g.sigma_axes[0] - 2.0).abs() < 1e-14 && (g.sigma_axes[1] - 1.0).abs() < 1e-14);
        let g = diagonalize(&loc(&[1.0, 0.0], &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert!((g.sigma_axes[0] - 3f64.sqrt()).abs() < 1e-14);
        assert!((g.sigma_axes[1] - 1.0).abs() < 1e-14);
        let h = 0.5f64.sqrt();
        assert!((g.eta[0] - h).abs() < 1e-14 && (g.eta[1].abs() - h).abs() < 1e-14);
        assert!((g.p.transpose() * &g.p - DMatrix::identity(2, 2)).amax() < 1e-12);
        assert!(rel(g.det_sigma, 3.0) < 1e-12);
        assert!(matches!(
            diagonalize(&loc(&[0.0, 0.0], &[1.0, 1.0, 1.0, 1.0])),
            Err(Error::DegenerateCovariance { .. })
        ));
    }

    #[test]
    fn quadrature_examples() {
        for d in 1..=3 {
            let l = GaussianLocation::isotropic(d, 3.0);
            assert!((eval_quadrature(&Integrand::Unit, &l).unwrap() - 1.0).abs() < 1e-12);
        }
        let pl = PathLoss::new(0.0, 1.0).unwrap();
        let v = eval_quadrature(&Integrand::PathLossMean(pl), &GaussianLocation::isotropic(2, 1.0)).unwrap();
        assert!(rel(v, (PI / 2.0).sqrt()) < 1e-10);
        let pl = PathLoss::new(1.0, 4.0).unwrap();
        let v = eval_quadrature(&Integrand::PathLossMean(pl), &GaussianLocation::isotropic(2, 20.0)).unwrap();
        assert!(rel(v, 0.036_688_169_023_397_8) < 1e-10);
        let pl = PathLoss::new(0.0, 2.0).unwrap();
        assert!(matches!(
            eval_quadrature(&Integrand::PathLossMean(pl), &GaussianLocation::isotropic(2, 1.0)),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn anisotropic_quadrature_matches_cartesian_oracle() {
        // Brute-force 2D Cartesian Simpson of E[g] for an offset, skewed Gaussian.
        let l = loc(&[1.5, -0.5], &[3.0, 1.2, 1.2, 2.0]);
        let pl = PathLoss::new(1.0, 4.0).unwrap();
        let got = eval_quadrature(&Integrand::PathLossMean(pl), &l).unwrap();
        let inv = l.sigma.clone().try_inverse().unwrap();
        let (i00, i01, i11) = (inv[(0, 0)], inv[(0, 1)], inv[(1, 1)]);
        let norm = 1.0 / (2.0 * PI * l.sigma.determinant().sqrt());
        let dens = |x: f64, y: f64| {
            let (u, v) = (x - 1.5, y + 0.5);
            norm * (-0.5 * (i00 * u * u + 2.0 * i01 * u * v + i11 * v * v)).exp()
        };
        let oracle = simpson(|x| simpson(|y| pl.g((x * x + y * y).sqrt()) * dens(x, y), -14.0, 14.0, 1400), -14.0, 14.0, 1400);
        assert!(rel(got, oracle) < 1e-8, "{got} vs {oracle}");
        let l3 = loc(&[0.5, 1.0, -0.3], &[2.0, 0.3, 0.1, 0.3, 1.0, 0.0, 0.1, 0.0, 0.7]);
        assert!((eval_quadrature(&Integrand::Unit, &l3).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn series_examples() {
        let g1 = diagonalize(&GaussianLocation::isotropic(1, 1.0)).unwrap();
        let one = SeriesControls {
            n_max: 1,
            r: Some(10.0),
            tol: 1e-10,
        };
        let err = eval_series(&Integrand::Unit, &g1, &one).unwrap_err();
        assert!(matches!(err, Error::SeriesDivergence { last_increment, .. }
            if (last_increment - 2.0 * 10.0 / (2.0 * PI).sqrt()).abs() < 1e-12));
        // Mass of N(0, 1) inside [−5, 5].
        let full = SeriesControls { n_max: 200, r: Some(5.0), tol: 1e-14 };
        let v = eval_series(&Integrand::Unit, &g1, &full).unwrap();
        assert!((v - (1.0 - 5.733_031_437_583_878e-7)).abs() < 1e-10);

        let pl = PathLoss::new(1.0, 4.0).unwrap();
        let l = loc(&[1.0, 1.0], &[20.0, 0.0, 0.0, 20.0]);
        let s = eval_series(&Integrand::PathLossMean(pl), &diagonalize(&l).unwrap(), &SeriesControls::default()).unwrap();
        let q = eval_quadrature(&Integrand::PathLossMean(pl), &l).unwrap();
        assert!(rel(s, q) < 1e-3, "{s} vs {q}");
        let g3 = diagonalize(&GaussianLocation::isotropic(3, 1.0)).unwrap();
        assert!(matches!(eval_series(&Integrand::Unit, &g3, &SeriesControls::default()), Err(Error::UnsupportedDimension(3))));
    }

    #[test]
    fn psi_examples() {
        let pl = PathLoss::new(0.0, 2.0).unwrap();
        assert!((psi_mean(3, &pl, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(psi_mean(1, &pl, 2.0), Err(Error::Divergence(_))));
        let pl = PathLoss::new(1.0, 2.0).unwrap();
        assert!(rel(psi_mean(1, &pl, 1.0).unwrap(), 2f64.ln() / 2.0) < 1e-13);
        let pl4 = PathLoss::new(1.0, 4.0).unwrap();
        let oracle = simpson(|r| r.powi(5) / (1.0 + r.powi(4)), 0.0, 3.0, 20_000);
        assert!(rel(psi_mean(5, &pl4, 3.0).unwrap(), oracle) < 1e-9);
        let oracle = simpson(|r| r.powi(3) / (1.0 + r.powi(4)).powi(2), 0.0, 3.0, 20_000);
        assert!(rel(psi_square(3, &pl4, 3.0).unwrap(), oracle) < 1e-9);

        assert!((psi_mgf(2, &pl, 0.0, 2.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // high-precision references of the defining integrals
        assert!(rel(psi_mgf(1, &pl, 0.5, 2.0, 2.0).unwrap(), 2.496_544_391_922_828_3) < 1e-8);
        let pl2 = PathLoss::new(2.0, 2.0).unwrap();
        assert!(rel(psi_mgf(1, &pl2, 1.0, 1.0, 5.0).unwrap(), 14.129_048_269_010_741) < 1e-8);
        assert!(matches!(psi_mgf(1, &pl, 2.0, 2.0, 1.0), Err(Error::ParameterDegeneracy(_))));
        assert!(matches!(psi_mgf(1, &pl, 3.0, 2.0, 1.0), Err(Error::MgfDomain { .. })));
        assert!(matches!(psi_mgf(1, &pl, 0.5, 2.5, 1.0), Err(Error::FallbackNeeded(_))));
        // negative beta with a singular path loss stays bounded
        let pl0 = PathLoss::new(0.0, 2.0).unwrap();
        let nu = Integrand::nakagami_mgf(pl0, -1.0, 2.0).unwrap();
        let oracle = simpson(|r| nu.eval(r) * r, 0.0, 2.0, 20_000);
        assert!(rel(psi_mgf(1, &pl0, -1.0, 2.0, 2.0).unwrap(), oracle) < 1e-9);
    }

    #[test]
    fn omega_examples() {
        let g1 = diagonalize(&GaussianLocation::isotropic(1, 1.0)).unwrap();
        assert_eq!(omega(&g1, 0, 0, 0).unwrap(), 2.0);
        let g2 = diagonalize(&GaussianLocation::isotropic(2, 1.0)).unwrap();
        assert!((omega(&g2, 0, 0, 0).unwrap() - 2.0 * PI).abs() < 1e-14);
        // odd power of a vanishing-mean axis
        let g = diagonalize(&loc(&[1.0, 0.0], &[2.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(omega(&g, 0, 1, 0).unwrap(), 0.0);
        // brute-force angular integration
        let cases = [
            (loc(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]), (1, 0, 0)),
            (loc(&[0.7, -1.2], &[3.0, 0.5, 0.5, 1.0]), (2, 3, 1)),
            (loc(&[0.3, 0.4], &[1.0, 0.0, 0.0, 4.0]), (3, 2, 2)),
        ];
        for (l, (k1, k2, k3)) in cases {
            let g = diagonalize(&l).unwrap();
            let (s1, s2) = (g.sigma_axes[0].powi(2), g.sigma_axes[1].powi(2));
            let (e1, e2) = (g.eta[0], g.eta[1]);
            let f = |phi: f64| {
                let (c, s) = (phi.cos(), phi.sin());
                (c * c / s1 + s * s / s2).powi(k1)
                    * (-2.0 * (e1 * c / s1 + e2 * s / s2)).powi(k2)
                    * (e1 * e1 / s1 + e2 * e2 / s2).powi(k3)
            };
            let n = 4000;
            let brute: f64 = (0..n).map(|i| f(2.0 * PI * i as f64 / n as f64)).sum::<f64>() * 2.0 * PI / n as f64;
            let got = omega(&g, k1 as usize, k2 as usize, k3 as usize).unwrap();
            assert!((got - brute).abs() < 1e-10 * brute.abs().max(1.0), "{got} vs {brute}");
        }
        let g3 = diagonalize(&GaussianLocation::isotropic(3, 1.0)).unwrap();
        assert!(matches!(omega(&g3, 0, 0, 0), Err(Error::UnsupportedDimension(3))));
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let cases = [(1usize, 0.5), (2, 1.0), (3, 2.0)];
        for (d, eps) in cases {
            for s2 in [0.5, 4.0, 50.0] {
                let l = GaussianLocation::isotropic(d, s2);
                let pl = PathLoss::new(eps, 2.0).unwrap();
                let c = closed_first_moment(&l, &pl, d).unwrap();
                let q = eval_quadrature(&Integrand::PathLossMean(pl), &l).unwrap();
                assert!(rel(c, q) < 1e-9, "mean d={d} s2={s2}: {c} vs {q}");
                let c = closed_second_moment(&l, &pl, &FadingModel::None, d).unwrap();
                let q = eval_quadrature(&Integrand::PathLossSquare(pl), &l).unwrap();
                assert!(rel(c, q) < 1e-9, "square d={d} s2={s2}: {c} vs {q}");
            }
        }
        let l = GaussianLocation::isotropic(1, 1.0);
        let pl = PathLoss::new(0.0, 0.4).unwrap();
        let c = closed_second_moment(&l, &pl, &FadingModel::nakagami(2.0).unwrap(), 1).unwrap();
        let q = eval_quadrature(&Integrand::PathLossSquare(pl), &l).unwrap();
        assert!(rel(c, 1.5 * q) < 1e-9);
        let l = GaussianLocation::isotropic(2, 1000.0);
        let pl = PathLoss::new(1.0, 4.0).unwrap();
        assert!(rel(closed_first_moment(&l, &pl, 2).unwrap(), 7.833_921_436_162_8e-4) < 1e-10);
        assert!(matches!(closed_first_moment(&l, &PathLoss::new(1.0, 3.0).unwrap(), 2), Err(Error::UnsupportedBranch(_))));
        assert!(matches!(closed_first_moment(&l, &PathLoss::new(0.0, 4.0).unwrap(), 2), Err(Error::Divergence(_))));
        let off = loc(&[1.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(closed_first_moment(&off, &pl, 2), Err(Error::UnsupportedBranch(_))));
        assert!(matches!(closed_second_moment(&l, &pl, &FadingModel::None, 2), Err(Error::UnsupportedBranch(_))));
    }

    fn pd_matrix(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
        (proptest::collection::vec(-1.0f64..1.0, d * d), proptest::collection::vec(0.3f64..3.0, d)).prop_map(move |(v, ev)| {
            let q = DMatrix::from_row_slice(d, d, &v).qr().q();
            &q * DMatrix::from_diagonal(&DVector::from_vec(ev)) * q.transpose()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn rotation_invariance(sigma in pd_matrix(2), mu in proptest::collection::vec(-2.0f64..2.0, 2), theta in 0.0f64..6.28) {
            let r = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
            let mu = DVector::from_vec(mu);
            let pl = PathLoss::new(0.5, 3.0).unwrap();
            let a = eval_quadrature(&Integrand::PathLossMean(pl), &GaussianLocation::from_parts(mu.clone(), sigma.clone())).unwrap();
            let b = eval_quadrature(&Integrand::PathLossMean(pl), &GaussianLocation::from_parts(&r * mu, &r * sigma * r.transpose())).unwrap();
            prop_assert!(rel(a, b) < 1e-8);
        }

        #[test]
        fn singular_scaling_law(s2 in 0.1f64..100.0, alpha in 0.2f64..1.9) {
            let pl = PathLoss::new(0.0, alpha).unwrap();
            let a = closed_first_moment(&GaussianLocation::isotropic(2, s2), &pl, 2).unwrap();
            let b = closed_first_moment(&GaussianLocation::isotropic(2, 4.0 * s2), &pl, 2).unwrap();
            prop_assert!(rel(a / b, 2f64.powf(alpha)) < 1e-12);
        }

        #[test]
        fn monotone_in_nu(sigma in pd_matrix(2), eps in 0.5f64..3.0) {
            let l = GaussianLocation::from_parts(DVector::from_vec(vec![0.5, -0.2]), sigma);
            let lo = eval_quadrature(&Integrand::PathLossMean(PathLoss::new(eps + 0.5, 2.0).unwrap()), &l).unwrap();
            let hi = eval_quadrature(&Integrand::PathLossMean(PathLoss::new(eps, 2.0).unwrap()), &l).unwrap();
            prop_assert!(lo <= hi + 1e-8);
        }
    }
}
