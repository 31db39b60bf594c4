//! One function per experiment kind. Each writes its files through
//! [`OutputDir`] and returns nothing else.

use std::fmt::Write as _;
use std::time::Instant;

use glauber_core::bounds::{
    boundary_sum, canonical_path_congestion, path_coupling_contraction, rec_majority_cut_bound,
    recursive_majority, variational_lower_bound,
};
use glauber_core::decay::{
    c_star, correlation_profile, correlation_profile_mc, decay_bound, disagreement_vs_bound, inner_boundary,
    DecayProfile,
};
use glauber_core::dynamics::simulate_ct;
use glauber_core::exact::{discrete_spectral_gap, exact_analysis, mixing_time_bounds, ExactAnalysis};
use glauber_core::model::{ising_value, Configuration, Model, ModelKind};
use glauber_core::ordering::{
    cutwidth_of_ordering, dfs_tree_ordering, exact_cutwidth, hyperbolic_ordering, inorder_tree_ordering,
    tau2_upper_bound_coloring, tau2_upper_bound_ising, EXACT_CUTWIDTH_LIMIT,
};
use glauber_core::stats::Moments;
use glauber_core::{Graph, LinearOrdering};
use serde::Serialize;

use crate::config::{
    DecayMethod, ExperimentConfig, ExperimentKind, InitialState, ModelName, OrderingMethod, SweepParameter,
};
use crate::error::CliError;
use crate::output::{OutputDir, Provenance};

/// Runs `kind` under `cfg`, writing into `cfg.out`. Returns the files written.
pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<Vec<String>, CliError> {
    if let Some(declared) = cfg.experiment.kind {
        if declared != kind {
            return Err(CliError::Config(format!(
                "config declares experiment `{}` but `{}` was requested",
                declared.name(),
                kind.name()
            )));
        }
    }
    let start = Instant::now();
    let mut out = OutputDir::create(&cfg.out, Provenance::new(cfg.seed, cfg.hash()))?;
    match kind {
        ExperimentKind::BuildGraph => build_graph(cfg, &mut out)?,
        ExperimentKind::ExactGap => exact_gap(cfg, &mut out)?,
        ExperimentKind::Simulate => simulate(cfg, &mut out)?,
        ExperimentKind::Bounds => bounds(cfg, &mut out)?,
        ExperimentKind::Cutwidth => cutwidth(cfg, &mut out)?,
        ExperimentKind::Decay => decay(cfg, &mut out)?,
        ExperimentKind::Couple => couple(cfg, &mut out)?,
        ExperimentKind::Sweep => sweep(cfg, &mut out)?,
    }
    out.finish(kind.name(), start.elapsed())
}

#[derive(Serialize)]
struct GraphSummary {
    n: usize,
    edges: usize,
    root: usize,
    radius: u32,
    max_degree: usize,
    is_tree: bool,
    has_rotation: bool,
    level_sizes: Vec<usize>,
}

fn summarize(g: &Graph) -> GraphSummary {
    GraphSummary {
        n: g.n(),
        edges: g.edge_count(),
        root: g.root(),
        radius: g.radius(),
        max_degree: g.max_degree(),
        is_tree: g.is_tree(),
        has_rotation: g.has_rotation(),
        level_sizes: (0..=g.radius()).map(|r| g.sphere(r).len()).collect(),
    }
}

fn build_graph(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let g = cfg.graph.build()?;
    out.raw("graph.txt", &g.to_text())?;
    out.json("build-graph.json", "build-graph", &summarize(&g))?;
    Ok(())
}

#[derive(Serialize)]
struct ExactGapResult {
    graph: GraphSummary,
    states: usize,
    lambda2: f64,
    tau2: f64,
    residual: f64,
    method: String,
    /// gap of the discrete-time chain I + 𝓛/n
    discrete_gap: f64,
    mixing_time_lower: f64,
    mixing_time_upper: f64,
}

fn exact_gap(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let g = cfg.graph.build()?;
    let m = cfg.model.build(&g)?;
    let ex = exact_analysis(&m, &g, cfg.limits.states)?;
    let (lo, hi) = mixing_time_bounds(&ex.report, &ex.table);
    let result = ExactGapResult {
        graph: summarize(&g),
        states: ex.table.len(),
        lambda2: ex.report.lambda2,
        tau2: ex.report.tau2,
        residual: ex.report.residual,
        method: ex.report.method.clone(),
        discrete_gap: discrete_spectral_gap(&ex.generator, &ex.table)?,
        mixing_time_lower: lo,
        mixing_time_upper: hi,
    };
    out.json("exact-gap.json", "exact-gap", &result)?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateResult {
    t_end: f64,
    replicas: usize,
    mean_events: f64,
    /// Ising only: mean and standard error of the final magnetisation
    /// per site
    magnetisation_mean: Option<f64>,
    magnetisation_std_err: Option<f64>,
    /// fraction of sites holding each spin at the end, averaged
    spin_frequencies: Vec<f64>,
    event_log: String,
}

fn simulate(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let g = cfg.graph.build()?;
    let m = cfg.model.build(&g)?;
    let t_end = cfg.experiment.t_end.unwrap_or(10.0);
    if cfg.replicas == 0 {
        return Err(CliError::Config("`replicas` must be positive".into()));
    }
    let init = initial_configuration(&m, &g, cfg.experiment.init)?;
    let q = m.alphabet_size();
    let mut events = Moments::default();
    let mut mag = Moments::default();
    let mut freq = vec![0.0; q];
    for rep in 0..cfg.replicas {
        let log = simulate_ct(&m, &g, &init, t_end, cfg.seed, rep as u64)?;
        if rep == 0 {
            out.csv("simulate.events.csv", &log.to_csv())?;
        }
        events.push(log.events.len() as f64);
        let spins = log.final_config.spins();
        if m.is_ising() {
            mag.push(spins.iter().map(|&s| ising_value(s)).sum::<f64>() / g.n() as f64);
        }
        for &s in spins {
            freq[s as usize] += 1.0 / (g.n() * cfg.replicas) as f64;
        }
    }
    let result = SimulateResult {
        t_end,
        replicas: cfg.replicas,
        mean_events: events.mean(),
        magnetisation_mean: m.is_ising().then(|| mag.mean()),
        magnetisation_std_err: (m.is_ising() && cfg.replicas > 1).then(|| mag.std_err()),
        spin_frequencies: freq,
        event_log: "simulate.events.csv".into(),
    };
    out.json("simulate.json", "simulate", &result)?;
    Ok(())
}

/// All-plus / all-minus for Ising; a greedy proper coloring otherwise
/// (Potts uses the constant state).
fn initial_configuration(m: &Model, g: &Graph, init: InitialState) -> Result<Configuration, CliError> {
    match m.kind() {
        ModelKind::Coloring { q } => {
            let mut spins = vec![0u8; g.n()];
            for v in 0..g.n() {
                let used: Vec<u8> = g.neighbors(v).iter().filter(|&&w| w < v).map(|&w| spins[w]).collect();
                spins[v] = (0..q as u8)
                    .find(|c| !used.contains(c))
                    .ok_or_else(|| CliError::Config("greedy coloring ran out of colors".into()))?;
            }
            Ok(Configuration(spins))
        }
        _ => Ok(Configuration::constant(
            g.n(),
            match init {
                InitialState::Plus => (m.alphabet_size() - 1) as u8,
                InitialState::Minus => 0,
            },
        )),
    }
}

/// Ordering chosen by `method`; `Auto` is exact when small enough, else the
/// rotation ordering, else depth-first.
pub fn choose_ordering(g: &Graph, method: OrderingMethod) -> Result<(String, LinearOrdering), CliError> {
    let pick = match method {
        OrderingMethod::Auto if g.n() <= EXACT_CUTWIDTH_LIMIT => OrderingMethod::Exact,
        OrderingMethod::Auto if g.has_rotation() => OrderingMethod::Hyperbolic,
        OrderingMethod::Auto => OrderingMethod::Dfs,
        other => other,
    };
    let (name, ord) = match pick {
        OrderingMethod::Exact => ("exact", exact_cutwidth(g)?),
        OrderingMethod::Dfs => ("dfs", dfs_tree_ordering(g)?),
        OrderingMethod::Inorder => ("inorder", inorder_tree_ordering(g)?),
        OrderingMethod::Hyperbolic => ("hyperbolic", hyperbolic_ordering(g)?),
        OrderingMethod::Auto => unreachable!("resolved above"),
    };
    Ok((name.to_string(), ord))
}

#[derive(Serialize)]
struct CutwidthResult {
    method: String,
    n: usize,
    width: usize,
    width_over_ln_n: Option<f64>,
    order: Vec<usize>,
}

fn cutwidth(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let g = cfg.graph.build()?;
    let (method, ord) = choose_ordering(&g, cfg.experiment.ordering)?;
    debug_assert_eq!(cutwidth_of_ordering(&g, &ord.order).map(|o| o.width).ok(), Some(ord.width));
    out.csv("cutwidth.csv", &ord.to_csv())?;
    let result = CutwidthResult {
        method,
        n: g.n(),
        width: ord.width,
        width_over_ln_n: (g.n() > 1).then(|| ord.width as f64 / (g.n() as f64).ln()),
        order: ord.order,
    };
    out.json("cutwidth.json", "cutwidth", &result)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub value: Option<f64>,
    pub error: Option<String>,
}

impl BoundEntry {
    fn from(name: &str, r: Result<f64, CliError>) -> Self {
        match r {
            Ok(v) => BoundEntry {
                name: name.into(),
                value: Some(v),
                error: None,
            },
            Err(e) => BoundEntry {
                name: name.into(),
                value: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Serialize)]
struct BoundsResult {
    lower_bounds: Vec<BoundEntry>,
    upper_bounds: Vec<BoundEntry>,
    exact_tau2: Option<f64>,
    ordering: String,
    cutwidth: usize,
    max_degree: usize,
}

fn bounds(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let g = cfg.graph.build()?;
    let m = cfg.model.build(&g)?;
    let (method, ord) = choose_ordering(&g, cfg.experiment.ordering)?;
    let ex: Result<ExactAnalysis, CliError> = exact_analysis(&m, &g, cfg.limits.states).map_err(Into::into);
    let with_exact = |f: &dyn Fn(&ExactAnalysis) -> Result<f64, CliError>| match &ex {
        Ok(ex) => f(ex),
        Err(e) => Err(CliError::Config(format!("exact analysis unavailable: {e}"))),
    };
    let lower = vec![
        BoundEntry::from(
            "boundary-sum",
            with_exact(&|ex| Ok(variational_lower_bound(&ex.table, &ex.generator, &boundary_sum(&g, &ex.table)?)?)),
        ),
        BoundEntry::from(
            "recursive-majority",
            with_exact(&|ex| {
                Ok(variational_lower_bound(&ex.table, &ex.generator, &recursive_majority(&g, &ex.table)?)?)
            }),
        ),
        BoundEntry::from(
            "recursive-majority-cut",
            with_exact(&|ex| {
                let eps = m
                    .eps()
                    .ok_or_else(|| CliError::Config("cut bound needs the Ising model".into()))?;
                Ok(rec_majority_cut_bound(&g, &ex.table, &ex.generator, eps)?.bound)
            }),
        ),
    ];
    let formula = match m.kind() {
        ModelKind::Ising { beta } => tau2_upper_bound_ising(g.n(), ord.width, g.max_degree(), beta).map_err(Into::into),
        ModelKind::Coloring { q } => tau2_upper_bound_coloring(g.n(), ord.width, g.max_degree(), q).map_err(Into::into),
        _ => Err(CliError::Config("no cut-width formula for this model".into())),
    };
    let upper = vec![
        BoundEntry::from(
            "canonical-path",
            with_exact(&|ex| Ok(canonical_path_congestion(&m, &g, &ord.order, &ex.table, &ex.generator)?.bound)),
        ),
        BoundEntry::from("cutwidth-formula", formula),
    ];
    let result = BoundsResult {
        lower_bounds: lower,
        upper_bounds: upper,
        exact_tau2: ex.as_ref().ok().map(|e| e.report.tau2),
        ordering: method,
        cutwidth: ord.width,
        max_degree: g.max_degree(),
    };
    out.json("bounds.json", "bounds", &result)?;
    Ok(())
}

#[derive(Serialize)]
struct DecayResult {
    profile: DecayProfile,
    set_a: Vec<usize>,
    inner_boundary: usize,
    delta: usize,
    c: f64,
    c_star: f64,
    lambda2: Option<f64>,
    bounds: Vec<Option<f64>>,
    disagreement: Option<glauber_core::decay::DisagreementReport>,
}

fn decay(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let g = cfg.graph.build()?;
    let m = cfg.model.build(&g)?;
    let e = &cfg.experiment;
    let a = e.set_a.clone().unwrap_or_else(|| vec![g.root()]);
    let radii = e.radii.clone().unwrap_or_else(|| (1..=g.radius()).collect());
    let exact_ok = (m.alphabet_size() as f64).powi(g.n() as i32) <= cfg.limits.states as f64;
    let use_exact = match e.method {
        DecayMethod::Exact => true,
        DecayMethod::Mc => false,
        DecayMethod::Auto => exact_ok,
    };
    let (profile, lambda2) = if use_exact {
        let p = correlation_profile(&m, &g, &a, &radii, cfg.limits.states)?;
        let l2 = match e.lambda2 {
            Some(l) => l,
            None => exact_analysis(&m, &g, cfg.limits.states)?.report.lambda2,
        };
        (p, Some(l2))
    } else {
        let samples = e.samples.unwrap_or(100_000);
        (correlation_profile_mc(&m, &g, &a, &radii, samples, cfg.seed)?, e.lambda2)
    };
    let delta = g.max_degree();
    let cs = c_star(delta)?;
    let c = e.c.unwrap_or(cs / 2.0);
    let boundary = inner_boundary(&g, &a).len();
    let mut csv = String::from("r,cov,mi,bound\n");
    let mut bounds = Vec::new();
    for (k, &r) in radii.iter().enumerate() {
        let d = g
            .set_distance(&a, &g.sphere(r))
            .ok_or_else(|| CliError::Config(format!("sphere {r} unreachable from A")))?;
        let bound = match lambda2 {
            Some(l2) => Some(decay_bound(c, delta, d, l2, boundary)?),
            None => None,
        };
        bounds.push(bound);
        let mi = profile.mi.get(k).map(|x| format!("{x:e}")).unwrap_or_default();
        let b = bound.map(|x| format!("{x:e}")).unwrap_or_default();
        let _ = writeln!(csv, "{r},{:e},{mi},{b}", profile.cov[k]);
    }
    let disagreement = match e.fpp_reps {
        Some(reps) if reps > 0 => Some(disagreement_vs_bound(&g, &a, &g.sphere(g.radius()), c, reps, cfg.seed)?),
        _ => None,
    };
    out.csv("decay.csv", &csv)?;
    let result = DecayResult {
        profile,
        set_a: a,
        inner_boundary: boundary,
        delta,
        c,
        c_star: cs,
        lambda2,
        bounds,
        disagreement,
    };
    out.json("decay.json", "decay", &result)?;
    Ok(())
}

fn couple(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let g = cfg.graph.build()?;
    let m = cfg.model.build(&g)?;
    let h = cfg.experiment.h.unwrap_or(2);
    let stats = path_coupling_contraction(&m, &g, h, cfg.replicas, cfg.seed)?;
    let mut csv = String::from("depth,vertex,distance,mean_delta,ci_low,ci_high\n");
    for d in &stats.depths {
        let _ = writeln!(
            csv,
            "{},{},{:e},{:e},{:e},{:e}",
            d.depth, d.vertex, d.distance, d.mean_delta, d.ci_low, d.ci_high
        );
    }
    out.csv("couple.csv", &csv)?;
    out.json("couple.json", "couple", &stats)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub parameter: &'static str,
    pub value: f64,
    pub r: Option<u32>,
    pub n: Option<usize>,
    pub states: Option<usize>,
    pub lambda2: Option<f64>,
    pub tau2: Option<f64>,
    pub error: Option<String>,
}

/// Exact gap at every grid point. A failing row keeps its error message
/// and the sweep continues.
pub fn sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a [sweep] section".into()))?;
    let depths: Vec<Option<u32>> = if spec.r.is_empty() {
        vec![None]
    } else {
        spec.r.iter().map(|&r| Some(r)).collect()
    };
    let name = match spec.parameter {
        SweepParameter::Beta => "beta",
        SweepParameter::Theta => "theta",
    };
    let mut rows = Vec::new();
    for &value in &spec.values {
        for &r in &depths {
            let mut c = cfg.clone();
            if r.is_some() {
                c.graph.r = r;
            }
            match spec.parameter {
                SweepParameter::Beta => {
                    c.model.beta = Some(value);
                    c.model.theta = None;
                }
                SweepParameter::Theta => {
                    c.model.theta = Some(value);
                    c.model.beta = None;
                }
            }
            let outcome = (|| -> Result<(usize, ExactAnalysis), CliError> {
                if c.model.kind == ModelName::Coloring {
                    return Err(CliError::Config("coloring has no temperature to sweep".into()));
                }
                let g = c.graph.build()?;
                let m = c.model.build(&g)?;
                Ok((g.n(), exact_analysis(&m, &g, c.limits.states)?))
            })();
            rows.push(match outcome {
                Ok((n, ex)) => SweepRow {
                    parameter: name,
                    value,
                    r,
                    n: Some(n),
                    states: Some(ex.table.len()),
                    lambda2: Some(ex.report.lambda2),
                    tau2: Some(ex.report.tau2),
                    error: None,
                },
                Err(e) => SweepRow {
                    parameter: name,
                    value,
                    r,
                    n: None,
                    states: None,
                    lambda2: None,
                    tau2: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(rows)
}

fn sweep(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let rows = sweep_rows(cfg)?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    let mut csv = String::from("parameter,value,r,n,states,lambda2,tau2,error\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            row.parameter,
            row.value,
            opt(row.r.map(|x| x.to_string())),
            opt(row.n.map(|x| x.to_string())),
            opt(row.states.map(|x| x.to_string())),
            opt(row.lambda2.map(|x| format!("{x:e}"))),
            opt(row.tau2.map(|x| format!("{x:e}"))),
            opt(row.error.as_ref().map(|e| format!("\"{}\"", e.replace('"', "'")))),
        );
    }
    out.csv("sweep.csv", &csv)?;
    out.json("sweep.json", "sweep", &rows)?;
    Ok(())
}
