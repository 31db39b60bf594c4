//! Experiment configuration: TOML with `[limits]`, `[graph]`, `[model]`,
//! `[experiment]` and `[sweep]` sections. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use glauber_core::exact::DEFAULT_RAW_LIMIT;
use glauber_core::graph::{
    build_augmented_tree, build_bary_tree, build_hyperbolic_ball, cycle_graph, path_graph, star_graph,
};
use glauber_core::model::{beta_of_theta, Model};
use glauber_core::Graph;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BuildGraph,
    ExactGap,
    Simulate,
    Bounds,
    Cutwidth,
    Decay,
    Couple,
    Sweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BuildGraph => "build-graph",
            ExperimentKind::ExactGap => "exact-gap",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::Cutwidth => "cutwidth",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Couple => "couple",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Output directory; excluded from the config hash.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub graph: GraphSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub experiment: ExperimentSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_replicas() -> usize {
    1000
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    /// Cap on q^n for exact enumeration.
    pub states: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            states: DEFAULT_RAW_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFamily {
    Bary,
    Augmented,
    Hyperbolic,
    Path,
    Cycle,
    Star,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub family: GraphFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    /// vertex count for paths and cycles, leaf count for stars
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec {
            family: GraphFamily::Bary,
            b: Some(2),
            r: Some(2),
            p: None,
            q: None,
            n: None,
            path: None,
        }
    }
}

fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing key `{key}`")))
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph, CliError> {
        let g = match self.family {
            GraphFamily::Bary => build_bary_tree(need(self.b, "graph.b")?, need(self.r, "graph.r")?)?,
            GraphFamily::Augmented => build_augmented_tree(need(self.b, "graph.b")?, need(self.r, "graph.r")?)?,
            GraphFamily::Hyperbolic => build_hyperbolic_ball(
                need(self.p, "graph.p")?,
                need(self.q, "graph.q")?,
                need(self.r, "graph.r")?,
            )?,
            GraphFamily::Path => path_graph(need(self.n, "graph.n")?)?,
            GraphFamily::Cycle => cycle_graph(need(self.n, "graph.n")?)?,
            GraphFamily::Star => star_graph(need(self.n, "graph.n")?)?,
            GraphFamily::File => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| CliError::Config("missing key `graph.path`".into()))?;
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                Graph::from_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
        };
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Ising,
    Potts,
    Coloring,
}

/// A constant field H on every vertex, or a file with one H per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Constant(f64),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// alternative to `beta` for the Ising model: θ = tanh β
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelName::Ising,
            beta: Some(0.5),
            theta: None,
            q: None,
            field: None,
        }
    }
}

impl ModelSpec {
    pub fn beta(&self) -> Result<f64, CliError> {
        match (self.beta, self.theta) {
            (Some(_), Some(_)) => Err(CliError::Config("give `model.beta` or `model.theta`, not both".into())),
            (Some(b), None) => Ok(b),
            (None, Some(t)) if (0.0..1.0).contains(&t) => Ok(beta_of_theta(t)),
            (None, Some(t)) => Err(CliError::Config(format!("`model.theta` = {t} must lie in [0, 1)"))),
            (None, None) => Err(CliError::Config("missing key `model.beta`".into())),
        }
    }

    pub fn build(&self, g: &Graph) -> Result<Model, CliError> {
        let m = match self.kind {
            ModelName::Ising => {
                let beta = self.beta()?;
                match &self.field {
                    None => Model::ising(beta)?,
                    Some(f) => Model::ising_with_field(beta, &field_values(f, g.n())?)?,
                }
            }
            ModelName::Potts => Model::potts(need(self.q, "model.q")?, self.beta()?)?,
            ModelName::Coloring => Model::coloring(need(self.q, "model.q")?)?,
        };
        if self.field.is_some() && self.kind != ModelName::Ising {
            return Err(CliError::Config("`model.field` applies to the Ising model only".into()));
        }
        Ok(m)
    }
}

fn field_values(f: &FieldSpec, n: usize) -> Result<Vec<f64>, CliError> {
    match f {
        FieldSpec::Constant(h) => Ok(vec![*h; n]),
        FieldSpec::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let values = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| {
                    l.trim().parse::<f64>().map_err(|e| {
                        CliError::Config(format!("{} line {}: {e}", path.display(), i + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != n {
                return Err(CliError::Config(format!(
                    "{}: {} field values for {n} vertices",
                    path.display(),
                    values.len()
                )));
            }
            Ok(values)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingMethod {
    /// exact for small graphs, else the rotation ordering, else depth-first
    #[default]
    Auto,
    Exact,
    Dfs,
    Inorder,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayMethod {
    #[default]
    Auto,
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    #[default]
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub init: InitialState,
    #[serde(default)]
    pub ordering: OrderingMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<u32>>,
    /// the set A for decay profiles; the root by default
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_a: Option<Vec<usize>>,
    /// speed c in the decay bound; c*/2 by default
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// spectral gap used by the decay bound when it cannot be computed
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default)]
    pub method: DecayMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fpp_reps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    Beta,
    Theta,
}

/// Grid of (parameter value) × (graph depth r); each row is an exact gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    #[serde(default)]
    pub values: Vec<f64>,
    /// depths to substitute for `graph.r`; the configured graph when empty
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r: Vec<u32>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
    }

    /// Reads `path` (or the defaults when `None`) and applies `key=value`
    /// overrides, where `key` is a dotted path such as `graph.r`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let (text, origin) = match path {
            Some(p) => (
                std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
                p.display().to_string(),
            ),
            None => (String::new(), "<defaults>".to_string()),
        };
        let mut table: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let merged = toml::to_string(&table).map_err(|e| CliError::Config(e.to_string()))?;
        if overrides.is_empty() {
            Self::from_toml(&text, &origin)
        } else {
            Self::from_toml(&merged, &format!("{origin} with overrides"))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical TOML form without the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = PathBuf::new();
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
    let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, sections) = parts.split_last().expect("split yields one part");
    // A section missing from the file starts from its default contents.
    if let Some(&top) = sections.first() {
        if !table.contains_key(top) {
            let defaults = toml::Table::try_from(ExperimentConfig::from_toml("", "<defaults>")?)
                .map_err(|e| CliError::Config(e.to_string()))?;
            if let Some(section) = defaults.get(top) {
                table.insert(top.to_string(), section.clone());
            }
        }
    }
    let mut cur = table;
    for s in sections {
        cur = cur
            .entry(s.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override `{key}`: `{s}` is not a section")))?;
    }
    // `beta` and `theta` are alternatives; setting one replaces the other.
    if sections == ["model"] {
        match *last {
            "beta" => drop(cur.remove("theta")),
            "theta" => drop(cur.remove("beta")),
            _ => {}
        }
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
