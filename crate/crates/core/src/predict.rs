//! Network-level interference prediction: mean, variance and MGF of
//! `I(t|s) = Σᵢ hᵢ g(‖yᵢ(t) − y₀(t)‖)` given node states at time `s`.

use nalgebra::DVector;

use crate::cgppf::{
    closed_first_moment, closed_second_moment, diagonalize, eval_quadrature, eval_series, isotropic_variance,
    Integrand, SeriesControls,
};
use crate::error::{invalid, Error, Result};
use crate::exec::{pairwise_sum, Execution};
use crate::lindyn::{predict_node_distribution, relative_distribution, GaussianLocation, GlcModel, NodeState};

pub use crate::cgppf::{FadingModel, PathLoss};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub model: GlcModel,
    pub state: NodeState,
}

impl Node {
    pub fn new(id: impl Into<String>, model: GlcModel, state: NodeState) -> Result<Self> {
        if state.x.len() != model.state_dim() {
            return Err(invalid(format!(
                "state has length {}, model expects {}",
                state.x.len(),
                model.state_dim()
            )));
        }
        Ok(Node {
            id: id.into(),
            model,
            state,
        })
    }
}

/// A reference (receiving) node, its interferers and the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub reference: Node,
    pub interferers: Vec<Node>,
    pub pathloss: PathLoss,
    pub fading: FadingModel,
    pub d: usize,
}

impl Scenario {
    pub fn new(reference: Node, interferers: Vec<Node>, pathloss: PathLoss, fading: FadingModel) -> Result<Self> {
        if interferers.is_empty() {
            return Err(invalid("a scenario needs at least one interferer"));
        }
        let d = reference.model.output_dim();
        let s = reference.state.s;
        for node in &interferers {
            if node.model.output_dim() != d {
                return Err(invalid(format!(
                    "node {} has output dimension {}, reference has {d}",
                    node.id,
                    node.model.output_dim()
                )));
            }
            if node.state.s != s {
                return Err(invalid(format!(
                    "node {} is anchored at s = {}, reference at s = {s}",
                    node.id, node.state.s
                )));
            }
        }
        Ok(Scenario {
            reference,
            interferers,
            pathloss,
            fading,
            d,
        })
    }

    pub fn anchor(&self) -> f64 {
        self.reference.state.s
    }

    pub fn len(&self) -> usize {
        self.interferers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interferers.is_empty()
    }

    /// Location of interferer `i` relative to the reference at time `t`.
    pub fn relative_location(&self, i: usize, t: f64) -> Result<GaussianLocation> {
        let node = self
            .interferers
            .get(i)
            .ok_or_else(|| invalid(format!("interferer index {i} out of range (N = {})", self.len())))?;
        relative_distribution(
            (&node.model, &node.state),
            (&self.reference.model, &self.reference.state),
            t,
        )
    }

    /// Relative locations at time `s`, where the prediction is deterministic.
    fn anchor_offsets(&self) -> Result<Vec<DVector<f64>>> {
        let s = self.anchor();
        let y0 = predict_node_distribution(&self.reference.model, &self.reference.state, s)?.mu;
        self.interferers
            .iter()
            .map(|n| Ok(predict_node_distribution(&n.model, &n.state, s)?.mu - &y0))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed form when the location is zero-mean isotropic and a formula
    /// exists, quadrature otherwise.
    #[default]
    Auto,
    Quadrature,
    /// Series form, falling back to quadrature when it does not converge.
    Series,
    /// Closed form only for the mean and MGF, unsupported cases being
    /// errors; a variance without a closed form falls back to quadrature.
    Closed,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PredictOptions {
    pub method: Method,
    pub execution: Execution,
    pub series: SeriesControls,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionResult {
    pub mean: f64,
    /// `+∞` when the second moment diverges.
    pub variance: f64,
    pub per_interferer_mean: Vec<f64>,
    pub t: f64,
    pub s: f64,
}

fn name_err(node: &Node, e: Error) -> Error {
    match e {
        Error::Divergence(msg) => Error::Divergence(format!("interferer {}: {msg}", node.id)),
        other => other,
    }
}

fn check_time(sc: &Scenario, t: f64) -> Result<()> {
    if !t.is_finite() || t < sc.anchor() {
        return Err(invalid(format!("prediction time t = {t} precedes anchor s = {}", sc.anchor())));
    }
    Ok(())
}

/// `G[ν]` under the chosen method. `closed` supplies the closed form when
/// one exists for `ν`.
pub(crate) fn functional(
    nu: &Integrand,
    loc: &GaussianLocation,
    opts: &PredictOptions,
    closed: Option<&dyn Fn(&GaussianLocation) -> Result<f64>>,
) -> Result<f64> {
    match opts.method {
        Method::Quadrature => eval_quadrature(nu, loc),
        Method::Closed => match closed {
            Some(f) => f(loc),
            None => Err(Error::UnsupportedBranch(format!("no closed form for {nu:?}"))),
        },
        Method::Auto => {
            if let (Some(f), Some(_)) = (closed, isotropic_variance(loc)) {
                match f(loc) {
                    Err(Error::UnsupportedBranch(_)) => {}
                    other => return other,
                }
            }
            eval_quadrature(nu, loc)
        }
        Method::Series => {
            let diag = diagonalize(loc)?;
            match eval_series(nu, &diag, &opts.series) {
                Err(e @ (Error::SeriesDivergence { .. } | Error::UnsupportedDimension(_))) => {
                    log::warn!("series form unavailable ({e}); using quadrature");
                    eval_quadrature(nu, loc)
                }
                other => other,
            }
        }
    }
}

/// Zero covariance (t = s, or noiseless dynamics) leaves a deterministic
/// relative location.
fn deterministic_offset(loc: &GaussianLocation) -> Option<f64> {
    (loc.sigma.amax() == 0.0).then(|| loc.mu.norm())
}

fn singular_distance(sc: &Scenario, node: &Node, r: f64) -> Result<f64> {
    let g = sc.pathloss.g(r);
    if !g.is_finite() {
        return Err(Error::Divergence(format!(
            "interferer {} coincides with the reference under singular path loss (eps = 0)",
            node.id
        )));
    }
    Ok(g)
}

struct Moments {
    mean: f64,
    variance: Result<f64>,
}

fn interferer_moments(sc: &Scenario, i: usize, t: f64, opts: &PredictOptions, want_var: bool) -> Result<Moments> {
    let node = &sc.interferers[i];
    let loc = if t == sc.anchor() {
        let off = sc.anchor_offsets()?.swap_remove(i);
        GaussianLocation {
            sigma: nalgebra::DMatrix::zeros(sc.d, sc.d),
            mu: off,
            t,
            s: t,
        }
    } else {
        sc.relative_location(i, t)?
    };
    if let Some(r) = deterministic_offset(&loc) {
        let g = singular_distance(sc, node, r)?;
        return Ok(Moments {
            mean: g,
            variance: Ok(sc.fading.variance() * g * g),
        });
    }
    let pl = sc.pathloss;
    let d = sc.d;
    let mean_closed = move |l: &GaussianLocation| closed_first_moment(l, &pl, d);
    let mean = functional(&Integrand::PathLossMean(pl), &loc, opts, Some(&mean_closed)).map_err(|e| name_err(node, e))?;
    let variance = if want_var {
        let fading = sc.fading;
        let h2 = fading.second_moment();
        let second_closed = move |l: &GaussianLocation| closed_second_moment(l, &pl, &fading, d);
        let square = |l: &GaussianLocation| Ok(h2 * eval_quadrature(&Integrand::PathLossSquare(pl), l)?);
        let second = match opts.method {
            Method::Closed => match second_closed(&loc) {
                Err(Error::UnsupportedBranch(msg)) => {
                    log::warn!("{msg}; variance by quadrature");
                    square(&loc)
                }
                other => other,
            },
            Method::Auto if isotropic_variance(&loc).is_some() => match second_closed(&loc) {
                Err(Error::UnsupportedBranch(_)) => square(&loc),
                other => other,
            },
            Method::Series => {
                functional(&Integrand::PathLossSquare(pl), &loc, opts, None).map(|v| h2 * v)
            }
            _ => square(&loc),
        };
        second.map(|m2| (m2 - mean * mean).max(0.0)).map_err(|e| name_err(node, e))
    } else {
        Ok(f64::NAN)
    };
    Ok(Moments { mean, variance })
}

fn all_moments(sc: &Scenario, t: f64, opts: &PredictOptions, want_var: bool) -> Result<Vec<Moments>> {
    check_time(sc, t)?;
    opts.execution
        .map_range(sc.len(), |i| interferer_moments(sc, i, t, opts, want_var))
        .into_iter()
        .collect()
}

/// Mean of `I(t|s)` (sum of per-interferer functionals `G_i[g]`), with the
/// variance alongside (`+∞` when the second moment diverges).
pub fn mean_interference_with(sc: &Scenario, t: f64, opts: &PredictOptions) -> Result<PredictionResult> {
    let moments = all_moments(sc, t, opts, true)?;
    let per: Vec<f64> = moments.iter().map(|m| m.mean).collect();
    let mut vars = Vec::with_capacity(moments.len());
    let mut diverged = false;
    for m in moments {
        match m.variance {
            Ok(v) => vars.push(v),
            Err(Error::Divergence(msg)) => {
                log::warn!("variance is infinite: {msg}");
                diverged = true;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(PredictionResult {
        mean: pairwise_sum(&per),
        variance: if diverged { f64::INFINITY } else { pairwise_sum(&vars) },
        per_interferer_mean: per,
        t,
        s: sc.anchor(),
    })
}

pub fn mean_interference(sc: &Scenario, t: f64) -> Result<PredictionResult> {
    mean_interference_with(sc, t, &PredictOptions::default())
}

/// `Var[I(t|s)] = Σᵢ (E[h²] G_i[g²] − G_i[g]²)`.
pub fn variance_interference_with(sc: &Scenario, t: f64, opts: &PredictOptions) -> Result<f64> {
    let moments = all_moments(sc, t, opts, true)?;
    let vars = moments.into_iter().map(|m| m.variance).collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&vars))
}

pub fn variance_interference(sc: &Scenario, t: f64) -> Result<f64> {
    variance_interference_with(sc, t, &PredictOptions::default())
}

/// Per-link MGF integrand for the scenario's fading model.
pub fn mgf_integrand(pl: &PathLoss, fading: &FadingModel, beta: f64) -> Result<Integrand> {
    match *fading {
        FadingModel::Nakagami { m } => Integrand::nakagami_mgf(*pl, beta, m),
        FadingModel::None => Integrand::exp_mgf(*pl, beta),
    }
}

/// `G_i[g]` for a single interferer.
pub(crate) fn interferer_mean(sc: &Scenario, i: usize, t: f64, opts: &PredictOptions) -> Result<f64> {
    check_time(sc, t)?;
    Ok(interferer_moments(sc, i, t, opts, false)?.mean)
}

/// `G_i[ν]` for a single interferer and an MGF integrand.
pub(crate) fn interferer_mgf(sc: &Scenario, i: usize, t: f64, nu: &Integrand, opts: &PredictOptions) -> Result<f64> {
    let node = &sc.interferers[i];
    let loc = if t == sc.anchor() {
        None
    } else {
        Some(sc.relative_location(i, t)?)
    };
    let r = match &loc {
        None => Some(sc.anchor_offsets()?[i].norm()),
        Some(l) => deterministic_offset(l),
    };
    if let Some(r) = r {
        singular_distance(sc, node, r)?;
        return Ok(nu.eval(r));
    }
    functional(nu, loc.as_ref().unwrap(), opts, None).map_err(|e| name_err(node, e))
}

/// `E[e^{βI(t|s)}] = Πᵢ G_i[ν_β]`.
pub fn mgf_interference_with(sc: &Scenario, t: f64, beta: f64, opts: &PredictOptions) -> Result<f64> {
    check_time(sc, t)?;
    if beta == 0.0 {
        return Ok(1.0);
    }
    let nu = mgf_integrand(&sc.pathloss, &sc.fading, beta)?;
    let factors: Vec<Result<f64>> = opts.execution.map_range(sc.len(), |i| interferer_mgf(sc, i, t, &nu, opts));
    let mut product = 1.0;
    for f in factors {
        product *= f?;
    }
    Ok(product)
}

pub fn mgf_interference(sc: &Scenario, t: f64, beta: f64) -> Result<f64> {
    mgf_interference_with(sc, t, beta, &PredictOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brownian_scenario(n: usize, eps: f64, alpha: f64, fading: FadingModel) -> Scenario {
        let b = GlcModel::brownian(2, 1.0).unwrap();
        let origin = NodeState::new(DVector::zeros(2), 0.0);
        let reference = Node::new("rx", b.clone(), origin.clone()).unwrap();
        let interferers = (0..n)
            .map(|i| Node::new(format!("tx{i}"), b.clone(), origin.clone()).unwrap())
            .collect();
        Scenario::new(reference, interferers, PathLoss::new(eps, alpha).unwrap(), fading).unwrap()
    }

    fn static_pair(distance: f64, eps: f64, alpha: f64, fading: FadingModel) -> Scenario {
        let still = GlcModel::new(
            nalgebra::DMatrix::zeros(2, 2),
            nalgebra::DMatrix::identity(2, 2),
            nalgebra::DMatrix::zeros(2, 2),
        )
        .unwrap();
        let reference = Node::new("rx", still.clone(), NodeState::new(DVector::zeros(2), 0.0)).unwrap();
        let tx = Node::new("tx", still, NodeState::new(DVector::from_vec(vec![distance, 0.0]), 0.0)).unwrap();
        Scenario::new(reference, vec![tx], PathLoss::new(eps, alpha).unwrap(), fading).unwrap()
    }

    #[test]
    fn brownian_reference_means() {
        let sc = brownian_scenario(6, 1.0, 4.0, FadingModel::nakagami(2.0).unwrap());
        for (t, want) in [(10.0, 0.2201), (50.0, 0.0463), (100.0, 0.0233), (500.0, 0.0047)] {
            let r = mean_interference(&sc, t).unwrap();
            assert!((r.mean - want).abs() < 5e-4, "t = {t}: {}", r.mean);
            assert!(r.variance > 0.0 && r.variance.is_finite());
            assert_eq!(r.per_interferer_mean.len(), 6);
        }
    }

    #[test]
    fn deterministic_anchor_time() {
        let sc = static_pair(1.0, 1.0, 4.0, FadingModel::None);
        let r = mean_interference(&sc, 0.0).unwrap();
        assert_eq!(r.mean, 0.5);
        assert_eq!(r.variance, 0.0);
        assert!((mgf_interference(&sc, 0.0, 2.0).unwrap() - 1f64.exp()).abs() < 1e-15);
        // noiseless nodes stay deterministic after s as well
        assert_eq!(mean_interference(&sc, 3.0).unwrap().mean, 0.5);
        let sc = brownian_scenario(2, 1.0, 4.0, FadingModel::nakagami(2.0).unwrap());
        assert_eq!(variance_interference(&sc, 0.0).unwrap(), 2.0 * 0.5 * 1.0);
        assert_eq!(mgf_interference(&sc, 5.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn divergence_names_interferer() {
        let sc = brownian_scenario(2, 0.0, 4.0, FadingModel::None);
        match mean_interference(&sc, 10.0) {
            Err(Error::Divergence(msg)) => assert!(msg.contains("tx0"), "{msg}"),
            other => panic!("expected divergence, got {other:?}"),
        }
        let sc = static_pair(0.0, 0.0, 1.0, FadingModel::None);
        assert!(matches!(mean_interference(&sc, 0.0), Err(Error::Divergence(_))));
        let sc = brownian_scenario(1, 0.0, 1.5, FadingModel::None);
        assert_eq!(mean_interference(&sc, 10.0).unwrap().variance, f64::INFINITY);
        assert!(matches!(variance_interference(&sc, 10.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn mgf_domain_enforced() {
        let sc = brownian_scenario(1, 1.0, 4.0, FadingModel::nakagami(2.0).unwrap());
        assert!(matches!(mgf_interference(&sc, 10.0, 2.0), Err(Error::MgfDomain { .. })));
        assert!(mgf_interference(&sc, 10.0, 1.9).is_ok());
        let sc = brownian_scenario(1, 0.0, 1.0, FadingModel::nakagami(2.0).unwrap());
        assert!(matches!(mgf_interference(&sc, 10.0, 0.1), Err(Error::MgfDomain { .. })));
        assert!(mgf_interference(&sc, 10.0, -0.1).unwrap() < 1.0);
        assert!(mean_interference(&sc, -1.0).is_err());
    }

    #[test]
    fn methods_agree() {
        let sc = brownian_scenario(2, 1.0, 2.0, FadingModel::nakagami(1.0).unwrap());
        let mut opts = PredictOptions::default();
        let auto = mean_interference_with(&sc, 10.0, &opts).unwrap();
        opts.method = Method::Quadrature;
        let quad = mean_interference_with(&sc, 10.0, &opts).unwrap();
        opts.method = Method::Series;
        let series = mean_interference_with(&sc, 10.0, &opts).unwrap();
        opts.method = Method::Closed;
        let closed = mean_interference_with(&sc, 10.0, &opts).unwrap();
        assert!(((auto.mean - quad.mean) / quad.mean).abs() < 1e-9);
        assert!(((closed.variance - quad.variance) / quad.variance).abs() < 1e-8);
        assert!(((series.mean - quad.mean) / quad.mean).abs() < 1e-3);
        let sc = brownian_scenario(2, 1.0, 3.0, FadingModel::None);
        assert!(matches!(mean_interference_with(&sc, 10.0, &opts), Err(Error::UnsupportedBranch(_))));
    }
}
