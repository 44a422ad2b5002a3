//! Exact sampling of node trajectories and fading, and empirical
//! interference statistics to check the predictions against.
//!
//! Every realization draws from its own ChaCha8 stream `(seed, k)`, so
//! results do not depend on how realizations are scheduled.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use sha2::{Digest, Sha256};

use crate::cgppf::{FadingModel, PathLoss};
use crate::error::{invalid, Error, Result};
use crate::exec::{pairwise_sum, Execution};
use crate::lindyn::transition_and_noise;
use crate::predict::{Node, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub times: Vec<f64>,
    /// `states[node][time]`; node 0 is the reference.
    pub states: Vec<Vec<DVector<f64>>>,
    /// `locations[node][time] = C x`.
    pub locations: Vec<Vec<DVector<f64>>>,
    pub seed: u64,
    pub scenario_hash: String,
}

impl TrajectorySet {
    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&u| (u - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or_else(|| invalid(format!("t = {t} is not on the trajectory grid")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStats {
    pub t: f64,
    pub mean_hat: f64,
    /// Unbiased (divides by `M − 1`).
    pub var_hat: f64,
    pub mgf_hat: Option<f64>,
    pub mgf_std_error: Option<f64>,
    pub std_error_mean: f64,
    pub m: usize,
}

/// One realization at a single time: the interference and the interferer
/// locations relative to the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub interference: f64,
    pub relative_locations: Vec<DVector<f64>>,
}

/// Hex SHA-256 of the scenario's debug encoding.
pub fn scenario_hash(sc: &Scenario) -> String {
    let digest = Sha256::digest(format!("{sc:?}").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn nodes(sc: &Scenario) -> impl Iterator<Item = &Node> {
    std::iter::once(&sc.reference).chain(&sc.interferers)
}

/// `L` with `LLᵀ = Θ`, from the eigen-decomposition with negative
/// round-off eigenvalues clamped to zero.
fn symmetric_factor(theta: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(theta.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < -1e-12 * scale {
            log::warn!("noise covariance has eigenvalue {v:e}; clamped to zero");
        }
        *v = v.max(0.0).sqrt();
    }
    eig.eigenvectors * DMatrix::from_diagonal(&roots)
}

/// Per-node, per-step `(Φ, L)` over a time grid.
struct Propagator {
    steps: Vec<Vec<(DMatrix<f64>, DMatrix<f64>)>>,
}

impl Propagator {
    fn new(sc: &Scenario, times: &[f64]) -> Result<Self> {
        let steps = nodes(sc)
            .map(|node| {
                times
                    .windows(2)
                    .map(|w| {
                        let (phi, theta) = transition_and_noise(&node.model, w[1] - w[0])?;
                        Ok((phi, symmetric_factor(&theta)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Propagator { steps })
    }

    fn run(&self, sc: &Scenario, rng: &mut ChaCha8Rng) -> Vec<Vec<DVector<f64>>> {
        nodes(sc)
            .zip(&self.steps)
            .map(|(node, steps)| {
                let mut x = node.state.x.clone();
                let mut path = Vec::with_capacity(steps.len() + 1);
                path.push(x.clone());
                for (phi, l) in steps {
                    let z = DVector::from_fn(x.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
                    x = phi * &x + l * z;
                    path.push(x.clone());
                }
                path
            })
            .collect()
    }
}

fn check_grid(sc: &Scenario, times: &[f64]) -> Result<()> {
    let s = sc.anchor();
    match times.first() {
        Some(&t0) if t0 == s => {}
        _ => return Err(invalid(format!("time grid must start at the anchor s = {s}"))),
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("time grid must be finite and strictly increasing"));
    }
    Ok(())
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn assemble(sc: &Scenario, times: &[f64], states: Vec<Vec<DVector<f64>>>, seed: u64) -> TrajectorySet {
    let locations = nodes(sc)
        .zip(&states)
        .map(|(node, path)| path.iter().map(|x| node.model.c() * x).collect())
        .collect();
    TrajectorySet {
        times: times.to_vec(),
        states,
        locations,
        seed,
        scenario_hash: scenario_hash(sc),
    }
}

/// Exact trajectories on `times` (which must start at `s`), drawn from
/// stream 0 of `seed`.
pub fn simulate_trajectories(sc: &Scenario, times: &[f64], seed: u64) -> Result<TrajectorySet> {
    check_grid(sc, times)?;
    let prop = Propagator::new(sc, times)?;
    let states = prop.run(sc, &mut stream_rng(seed, 0));
    Ok(assemble(sc, times, states, seed))
}

/// Unit-mean power gain: Gamma(shape m, rate m) for Nakagami, 1 otherwise.
pub fn sample_fading<R: Rng + ?Sized>(f: &FadingModel, rng: &mut R) -> f64 {
    match *f {
        FadingModel::None => 1.0,
        FadingModel::Nakagami { m } => Gamma::new(m, 1.0 / m).expect("validated Nakagami m").sample(rng),
    }
}

enum Fader {
    Unit,
    Gamma(Gamma<f64>),
}

impl Fader {
    fn new(f: &FadingModel) -> Result<Self> {
        match *f {
            FadingModel::None => Ok(Fader::Unit),
            FadingModel::Nakagami { m } => Gamma::new(m, 1.0 / m)
                .map(Fader::Gamma)
                .map_err(|e| invalid(format!("Nakagami m = {m}: {e}"))),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Fader::Unit => 1.0,
            Fader::Gamma(g) => g.sample(rng),
        }
    }
}

fn interference_at(
    locations: &[Vec<DVector<f64>>],
    j: usize,
    pl: &PathLoss,
    fader: &Fader,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let y0 = &locations[0][j];
    let terms = locations[1..]
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let g = pl.g((&path[j] - y0).norm());
            if !g.is_finite() {
                return Err(Error::Divergence(format!(
                    "interferer {i} coincides with the reference under singular path loss"
                )));
            }
            Ok(fader.draw(rng) * g)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// `Σᵢ hᵢ g(‖yᵢ(t) − y₀(t)‖)` on realized locations, with fresh fading.
pub fn realized_interference(
    traj: &TrajectorySet,
    t: f64,
    pl: &PathLoss,
    f: &FadingModel,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let j = traj.time_index(t)?;
    interference_at(&traj.locations, j, pl, &Fader::new(f)?, rng)
}

/// Rejects `m < 2` and warns below 100.
pub fn check_realization_count(m: usize) -> Result<()> {
    if m < 2 {
        return Err(invalid(format!("need at least 2 realizations, got {m}")));
    }
    if m < 100 {
        log::warn!("only {m} realizations; standard errors will be unreliable");
    }
    Ok(())
}

/// `interference[k][j]` for realization `k` at `times[j]`. A grid not
/// starting at `s` is extended by `s`, which is not reported.
pub fn realization_matrix(
    sc: &Scenario,
    times: &[f64],
    m: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    let s = sc.anchor();
    let grid: Vec<f64> = if times.first() == Some(&s) {
        times.to_vec()
    } else {
        std::iter::once(s).chain(times.iter().copied()).collect()
    };
    check_grid(sc, &grid)?;
    let skip = grid.len() - times.len();
    let prop = Propagator::new(sc, &grid)?;
    let fader = Fader::new(&sc.fading)?;
    exec.map_range(m, |k| {
        let mut rng = stream_rng(seed, k as u64);
        let states = prop.run(sc, &mut rng);
        let locations: Vec<Vec<DVector<f64>>> = nodes(sc)
            .zip(&states)
            .map(|(node, path)| path.iter().map(|x| node.model.c() * x).collect())
            .collect();
        (skip..grid.len())
            .map(|j| interference_at(&locations, j, &sc.pathloss, &fader, &mut rng))
            .collect()
    })
    .into_iter()
    .collect()
}

/// Realizations at one time `t > s` (or `t = s`), with relative locations.
pub fn sample_realizations(sc: &Scenario, t: f64, m: usize, seed: u64, exec: Execution) -> Result<Vec<Realization>> {
    let s = sc.anchor();
    let grid = if t == s { vec![s] } else { vec![s, t] };
    check_grid(sc, &grid)?;
    let prop = Propagator::new(sc, &grid)?;
    let fader = Fader::new(&sc.fading)?;
    let last = grid.len() - 1;
    exec.map_range(m, |k| {
        let mut rng = stream_rng(seed, k as u64);
        let states = prop.run(sc, &mut rng);
        let locations: Vec<Vec<DVector<f64>>> = nodes(sc)
            .zip(&states)
            .map(|(node, path)| path.iter().map(|x| node.model.c() * x).collect())
            .collect();
        let interference = interference_at(&locations, last, &sc.pathloss, &fader, &mut rng)?;
        let y0 = &locations[0][last];
        Ok(Realization {
            interference,
            relative_locations: locations[1..].iter().map(|p| &p[last] - y0).collect(),
        })
    })
    .into_iter()
    .collect()
}

impl EmpiricalStats {
    /// Sample statistics of interference draws at time `t`.
    pub fn from_samples(t: f64, samples: &[f64], beta: Option<f64>) -> EmpiricalStats {
        summarize(t, samples, beta)
    }
}

fn summarize(t: f64, samples: &[f64], beta: Option<f64>) -> EmpiricalStats {
    let m = samples.len();
    let mf = m as f64;
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let (mean, var) = if lo == hi {
        (lo, 0.0)
    } else {
        let mean = pairwise_sum(samples) / mf;
        let sq: Vec<f64> = samples.iter().map(|x| (x - mean).powi(2)).collect();
        (mean, pairwise_sum(&sq) / (mf - 1.0))
    };
    let (mgf_hat, mgf_std_error) = match beta {
        Some(b) => {
            let e: Vec<f64> = samples.iter().map(|x| (b * x).exp()).collect();
            let mean_e = pairwise_sum(&e) / mf;
            let dev: Vec<f64> = e.iter().map(|x| (x - mean_e).powi(2)).collect();
            let se = (pairwise_sum(&dev) / (mf - 1.0) / mf).sqrt();
            (Some(mean_e), Some(se))
        }
        None => (None, None),
    };
    EmpiricalStats {
        t,
        mean_hat: mean,
        var_hat: var,
        mgf_hat,
        mgf_std_error,
        std_error_mean: (var / mf).sqrt(),
        m,
    }
}

/// Statistics at every `times[j]` from `m` realizations sharing trajectories
/// across times; fading is redrawn at each time.
pub fn empirical_statistics_grid(
    sc: &Scenario,
    times: &[f64],
    m: usize,
    beta: Option<f64>,
    seed: u64,
    exec: Execution,
) -> Result<Vec<EmpiricalStats>> {
    check_realization_count(m)?;
    let rows = realization_matrix(sc, times, m, seed, exec)?;
    Ok(times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            summarize(t, &column, beta)
        })
        .collect())
}

pub fn empirical_statistics(sc: &Scenario, t: f64, m: usize, beta: Option<f64>, seed: u64) -> Result<EmpiricalStats> {
    empirical_statistics_with(sc, t, m, beta, seed, Execution::default())
}

pub fn empirical_statistics_with(
    sc: &Scenario,
    t: f64,
    m: usize,
    beta: Option<f64>,
    seed: u64,
    exec: Execution,
) -> Result<EmpiricalStats> {
    check_realization_count(m)?;
    let samples: Vec<f64> = sample_realizations(sc, t, m, seed, exec)?
        .into_iter()
        .map(|r| r.interference)
        .collect();
    Ok(summarize(t, &samples, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindyn::{GlcModel, NodeState};
    use crate::predict::mean_interference;

    fn pair(model: GlcModel, x: DVector<f64>, eps: f64, alpha: f64, fading: FadingModel) -> Scenario {
        let origin = NodeState::new(DVector::zeros(x.len()), 0.0);
        let reference = Node::new("rx", model.clone(), origin).unwrap();
        let tx = Node::new("tx", model, NodeState::new(x, 0.0)).unwrap();
        Scenario::new(reference, vec![tx], PathLoss::new(eps, alpha).unwrap(), fading).unwrap()
    }

    fn still() -> GlcModel {
        GlcModel::new(DMatrix::zeros(2, 2), DMatrix::identity(2, 2), DMatrix::zeros(2, 2)).unwrap()
    }

    #[test]
    fn noiseless_circular_motion_keeps_radius() {
        let mut m = GlcModel::circular_2d(0.3, 0.0).unwrap();
        m = GlcModel::new(m.a().clone(), m.c().clone(), DMatrix::zeros(2, 2)).unwrap();
        let sc = pair(m, DVector::from_vec(vec![3.0, 4.0]), 1.0, 2.0, FadingModel::None);
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.7).collect();
        let traj = simulate_trajectories(&sc, &times, 9).unwrap();
        for y in &traj.locations[1] {
            assert!((y.norm() - 5.0).abs() < 1e-12);
        }
        assert_eq!(traj.states[1][0], sc.interferers[0].state.x);
    }

    #[test]
    fn seeds_are_reproducible() {
        let sc = pair(GlcModel::brownian(2, 1.0).unwrap(), DVector::zeros(2), 1.0, 4.0, FadingModel::nakagami(2.0).unwrap());
        let times = [0.0, 1.0, 2.5];
        let a = simulate_trajectories(&sc, &times, 42).unwrap();
        assert_eq!(a, simulate_trajectories(&sc, &times, 42).unwrap());
        assert_ne!(a.states, simulate_trajectories(&sc, &times, 43).unwrap().states);
        assert_eq!(a.scenario_hash.len(), 64);
        let seq = empirical_statistics_with(&sc, 2.0, 300, Some(0.3), 5, Execution::Sequential).unwrap();
        let par = empirical_statistics_with(&sc, 2.0, 300, Some(0.3), 5, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn brownian_endpoint_covariance() {
        let sc = pair(GlcModel::brownian(2, 1.0).unwrap(), DVector::zeros(2), 1.0, 4.0, FadingModel::None);
        let reals = sample_realizations(&sc, 10.0, 10_000, 11, Execution::default()).unwrap();
        let n = reals.len() as f64;
        let mut cov = DMatrix::<f64>::zeros(2, 2);
        for r in &reals {
            let y = &r.relative_locations[0];
            cov += y * y.transpose();
        }
        cov /= n;
        // relative covariance 2(t - s) I; entries have sd 20 sqrt(2/n) on the diagonal
        assert!((cov[(0, 0)] - 20.0).abs() < 4.0 * 20.0 * (2.0 / n).sqrt());
        assert!((cov[(1, 1)] - 20.0).abs() < 4.0 * 20.0 * (2.0 / n).sqrt());
        assert!(cov[(0, 1)].abs() < 4.0 * 20.0 / n.sqrt());
    }

    #[test]
    fn fading_moments() {
        let mut rng = stream_rng(3, 0);
        assert_eq!(sample_fading(&FadingModel::None, &mut rng), 1.0);
        let f = FadingModel::nakagami(2.0).unwrap();
        let draws: Vec<f64> = (0..100_000).map(|_| sample_fading(&f, &mut rng)).collect();
        let s = summarize(0.0, &draws, None);
        assert!((s.mean_hat - 1.0).abs() < 3.0 * s.std_error_mean);
        assert!((s.var_hat - 0.5).abs() < 0.02);
    }

    #[test]
    fn realized_interference_cases() {
        let sc = pair(still(), DVector::from_vec(vec![1.0, 0.0]), 1.0, 4.0, FadingModel::None);
        let traj = simulate_trajectories(&sc, &[0.0, 1.0], 1).unwrap();
        let mut rng = stream_rng(1, 1);
        assert_eq!(realized_interference(&traj, 1.0, &sc.pathloss, &sc.fading, &mut rng).unwrap(), 0.5);
        assert!(realized_interference(&traj, 0.5, &sc.pathloss, &sc.fading, &mut rng).is_err());
        let sc = pair(still(), DVector::zeros(2), 0.0, 2.0, FadingModel::None);
        let traj = simulate_trajectories(&sc, &[0.0], 1).unwrap();
        assert!(matches!(
            realized_interference(&traj, 0.0, &sc.pathloss, &sc.fading, &mut rng),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn deterministic_statistics() {
        let sc = pair(still(), DVector::from_vec(vec![0.3, 0.7]), 1.0, 4.0, FadingModel::None);
        let st = empirical_statistics(&sc, 5.0, 200, Some(0.0), 1).unwrap();
        assert_eq!(st.var_hat, 0.0);
        assert_eq!(st.mean_hat, mean_interference(&sc, 5.0).unwrap().mean);
        assert_eq!(st.mgf_hat, Some(1.0));
        assert!(empirical_statistics(&sc, 5.0, 1, None, 1).is_err());
    }

    #[test]
    fn grid_statistics_track_prediction() {
        let sc = pair(GlcModel::brownian(2, 1.0).unwrap(), DVector::from_vec(vec![2.0, 0.0]), 1.0, 4.0, FadingModel::nakagami(1.0).unwrap());
        let times = [1.0, 4.0];
        let stats = empirical_statistics_grid(&sc, &times, 4000, None, 17, Execution::default()).unwrap();
        for st in stats {
            let want = mean_interference(&sc, st.t).unwrap().mean;
            assert!((st.mean_hat - want).abs() < 4.0 * st.std_error_mean, "t = {}", st.t);
        }
    }
}
