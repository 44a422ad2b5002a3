//! Scenario files: TOML with explicit row-major matrices, plus the bundled
//! presets (`preset:NAME`).
//!
//! ```toml
//! schema_version = 1
//! dimension = 2
//!
//! [[nodes]]
//! id = "rx"
//! role = "reference"
//! a = [[0.0, 0.0], [0.0, 0.0]]
//! c = [[1.0, 0.0], [0.0, 1.0]]
//! q = [[1.0, 0.0], [0.0, 1.0]]
//! x0 = [0.0, 0.0]
//! s = 0.0
//!
//! [channel]
//! eps = 1.0
//! alpha = 4.0
//! fading = "nakagami"
//! m = 2.0
//!
//! [run]
//! t = "10:100:10"   # or a list
//! ```

use std::collections::HashSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cgppf::{FadingModel, PathLoss};
use crate::error::{Error, Result};
use crate::lindyn::{GlcModel, NodeState};
use crate::predict::{Node, Scenario};

pub const SCHEMA_VERSION: u32 = 1;

const PRESETS: &[(&str, &str)] = &[
    ("brownian2d", include_str!("../presets/brownian2d.scn")),
    ("inertia2d", include_str!("../presets/inertia2d.scn")),
    ("inertia2d_equal", include_str!("../presets/inertia2d_equal.scn")),
    ("ucm2d", include_str!("../presets/ucm2d.scn")),
    ("ucm3d", include_str!("../presets/ucm3d.scn")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Reference,
    Interferer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub role: Role,
    pub a: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingKind {
    None,
    Nakagami,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub eps: f64,
    pub alpha: f64,
    pub fading: FadingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

/// Either an explicit list or an inclusive `"start:stop:step"` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    List(Vec<f64>),
    Range(String),
}

impl TimeGrid {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        match self {
            TimeGrid::List(v) => Ok(v.clone()),
            TimeGrid::Range(r) => parse_time_grid(r),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<TimeGrid>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub dimension: usize,
    pub nodes: Vec<NodeSpec>,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub run: RunSpec,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Scenario(msg.into())
}

/// Comma-separated list (`"10,50,100"`) or inclusive range
/// (`"start:stop:step"`). The empty string is the empty grid.
pub fn parse_time_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("time grid: cannot parse {s:?} as a number")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad(format!("time range {text:?} must be start:stop:step")));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(bad(format!("time range {text:?} needs step > 0 and stop >= start")));
        }
        let n = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize;
        return Ok((0..=n).map(|k| start + k as f64 * step).collect());
    }
    text.split(',').map(num).collect()
}

fn matrix(rows: &[Vec<f64>], shape: (usize, usize), what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        let got: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(bad(format!(
            "{what} must be {}x{}, got {} rows with lengths {got:?}",
            shape.0,
            shape.1,
            rows.len()
        )));
    }
    Ok(DMatrix::from_fn(shape.0, shape.1, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl NodeSpec {
    fn to_node(&self, d: usize) -> Result<Node> {
        let n = self.x0.len();
        if n == 0 {
            return Err(bad(format!("node {}: x0 is empty", self.id)));
        }
        let ctx = |what: &str| format!("node {}: {what}", self.id);
        let a = matrix(&self.a, (n, n), &ctx("a"))?;
        let c = matrix(&self.c, (d, n), &ctx("c"))?;
        let q = matrix(&self.q, (n, n), &ctx("q"))?;
        let model = GlcModel::new(a, c, q).map_err(|e| bad(format!("node {}: {e}", self.id)))?;
        let state = NodeState::new(DVector::from_vec(self.x0.clone()), self.s);
        Node::new(self.id.clone(), model, state).map_err(|e| bad(format!("node {}: {e}", self.id)))
    }

    fn from_node(node: &Node, role: Role) -> Self {
        NodeSpec {
            id: node.id.clone(),
            role,
            a: rows(node.model.a()),
            c: rows(node.model.c()),
            q: rows(node.model.q()),
            x0: node.state.x.iter().copied().collect(),
            s: node.state.s,
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| bad(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| bad(e.to_string()))
    }

    pub fn from_scenario(sc: &Scenario, run: RunSpec) -> Self {
        let mut nodes = vec![NodeSpec::from_node(&sc.reference, Role::Reference)];
        nodes.extend(sc.interferers.iter().map(|n| NodeSpec::from_node(n, Role::Interferer)));
        let (fading, m) = match sc.fading {
            FadingModel::None => (FadingKind::None, None),
            FadingModel::Nakagami { m } => (FadingKind::Nakagami, Some(m)),
        };
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            dimension: sc.d,
            nodes,
            channel: ChannelSpec {
                eps: sc.pathloss.eps,
                alpha: sc.pathloss.alpha,
                fading,
                m,
            },
            run,
        }
    }

    /// Validates and builds the scenario.
    pub fn to_scenario(&self) -> Result<Scenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let d = self.dimension;
        if d == 0 {
            return Err(bad("dimension must be positive"));
        }
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) {
                return Err(bad(format!("duplicate node id {:?}", n.id)));
            }
        }
        let refs: Vec<&NodeSpec> = self.nodes.iter().filter(|n| n.role == Role::Reference).collect();
        if refs.len() != 1 {
            return Err(bad(format!("exactly one reference node required, found {}", refs.len())));
        }
        let reference = refs[0].to_node(d)?;
        let interferers = self
            .nodes
            .iter()
            .filter(|n| n.role == Role::Interferer)
            .map(|n| n.to_node(d))
            .collect::<Result<Vec<_>>>()?;
        let ch = &self.channel;
        let pathloss = PathLoss::new(ch.eps, ch.alpha).map_err(|e| bad(format!("channel: {e}")))?;
        let fading = match (ch.fading, ch.m) {
            (FadingKind::None, None) => FadingModel::None,
            (FadingKind::None, Some(_)) => return Err(bad("channel: m is only meaningful with nakagami fading")),
            (FadingKind::Nakagami, Some(m)) => FadingModel::nakagami(m).map_err(|e| bad(format!("channel: {e}")))?,
            (FadingKind::Nakagami, None) => return Err(bad("channel: nakagami fading needs m")),
        };
        Scenario::new(reference, interferers, pathloss, fading).map_err(|e| bad(e.to_string()))
    }
}

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let known: Vec<&str> = preset_names().collect();
            bad(format!("unknown preset {name:?} (known: {})", known.join(", ")))
        })
}

/// Reads a scenario file, or a bundled one when `path` is `preset:NAME`.
pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    let path = path.as_ref();
    let text = match path.to_str().and_then(|p| p.strip_prefix("preset:")) {
        Some(name) => preset_text(name)?.to_string(),
        None => std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
    };
    ScenarioFile::parse(&text).map_err(|e| match e {
        Error::Scenario(msg) => Error::Scenario(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    load_scenario_file(path)?.to_scenario()
}

pub fn write_scenario(sc: &Scenario, run: RunSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = ScenarioFile::from_scenario(sc, run).to_toml()?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
