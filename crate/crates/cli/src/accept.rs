//! Acceptance suite: criteria 1 to 12, each a list of named checks. The
//! report is deterministic for a fixed seed; wall times are kept apart in
//! [`SuiteTimings`]. Criterion 13 (repeatability) compares two runs and is
//! driven from outside.

use std::path::Path;
use std::time::{Duration, Instant};

use glauber_core::bounds::{
    boundary_sum, canonical_path_congestion, path_coupling_contraction, rec_majority_recursion,
    recursive_majority, recursive_majority_value, tanh_gap, tanh_gap_derivative, variational_lower_bound,
};
use glauber_core::decay::{c_star, correlation_profile, disagreement_vs_bound, rate_function};
use glauber_core::exact::{
    discrete_spectral_gap, exact_analysis, stationary_distribution, GibbsTable, DEFAULT_RAW_LIMIT,
};
use glauber_core::graph::{build_augmented_tree, build_bary_tree, build_hyperbolic_ball, path_graph, star_graph};
use glauber_core::model::{beta_of_theta, broadcast_on_tree, eps_of_beta, ising_value, Model};
use glauber_core::ordering::{dfs_tree_ordering, exact_cutwidth, hyperbolic_ordering, tau2_upper_bound_coloring, tau2_upper_bound_ising};
use glauber_core::rng::stream;
use glauber_core::stats::{wilson, Z95};
use glauber_core::Graph;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{OutputDir, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteTimings {
    pub seconds: Vec<(u32, f64)>,
    pub total_seconds: f64,
}

impl SuiteReport {
    pub fn lines(&self) -> Vec<String> {
        self.criteria
            .iter()
            .map(|c| {
                let failing: Vec<&str> = c.checks.iter().filter(|k| !k.passed).map(|k| k.name.as_str()).collect();
                let mut line = format!("criterion {:>2} {}  {}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.title);
                if !failing.is_empty() {
                    line.push_str(&format!("  [failed: {}]", failing.join("; ")));
                }
                line
            })
            .collect()
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn add(&mut self, name: impl Into<String>, passed: bool, value: Value) {
        self.0.push(Check {
            name: name.into(),
            passed,
            value,
        });
    }

    fn within(&mut self, name: impl Into<String>, start: Instant, limit: Duration) {
        self.add(name, start.elapsed() <= limit, Value::Null);
    }
}

type Criterion = (u32, &'static str, fn(u64) -> Result<Checks, CliError>);

const CRITERIA: [Criterion; 12] = [
    (1, "stationary vector equals enumerated Gibbs law", c1_oracle_consistency),
    (2, "free dynamics has unit gap", c2_infinite_temperature),
    (3, "discrete gap is continuous gap over n", c3_discrete_relation),
    (4, "lower bounds <= tau2 <= canonical paths <= cut-width formula", c4_sandwich),
    (5, "coloring cut-width bound", c5_coloring),
    (6, "cut-width of trees and hyperbolic orderings", c6_cutwidth),
    (7, "broadcast law equals Gibbs law", c7_broadcast),
    (8, "low-temperature growth of tau2", c8_low_temperature),
    (9, "high-temperature boundedness and block contraction", c9_high_temperature),
    (10, "recursive majority reconstruction error", c10_majority),
    (11, "tanh gap lemma", c11_tanh),
    (12, "decay machinery", c12_decay),
];

fn sub_seed(seed: u64, id: u32) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ u64::from(id)
}

pub fn run_suite(seed: u64) -> Result<(SuiteReport, SuiteTimings), CliError> {
    run_selected(seed, &[])
}

/// Runs the criteria whose ids are in `only` (all when empty).
pub fn run_selected(seed: u64, only: &[u32]) -> Result<(SuiteReport, SuiteTimings), CliError> {
    let start = Instant::now();
    let mut criteria = Vec::new();
    let mut seconds = Vec::new();
    for (id, title, f) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let checks = f(sub_seed(seed, id))?.0;
        seconds.push((id, t0.elapsed().as_secs_f64()));
        criteria.push(CriterionReport {
            id,
            title,
            passed: checks.iter().all(|c| c.passed),
            checks,
        });
    }
    let passed = criteria.iter().filter(|c| c.passed).count();
    let report = SuiteReport {
        seed,
        failed: criteria.len() - passed,
        passed,
        criteria,
    };
    let timings = SuiteTimings {
        seconds,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, timings))
}

/// Runs the suite, writes `accept.json` plus the `accept.timing.json`
/// sidecar into `dir` and prints one line per criterion.
pub fn run_accept(seed: u64, config_hash: String, dir: &Path, only: &[u32]) -> Result<SuiteReport, CliError> {
    let start = Instant::now();
    let mut out = OutputDir::create(dir, Provenance::new(seed, config_hash))?;
    let (report, timings) = run_selected(seed, only)?;
    for line in report.lines() {
        println!("{line}");
    }
    println!("{} passed, {} failed", report.passed, report.failed);
    out.json("accept.json", "accept", &report)?;
    let mut timing = serde_json::to_string_pretty(&timings).expect("timings serialise");
    timing.push('\n');
    out.raw("accept.timing.json", &timing)?;
    out.finish("accept", start.elapsed())?;
    Ok(report)
}

fn ising(beta: f64) -> Result<Model, CliError> {
    Ok(Model::ising(beta)?)
}

fn c1_oracle_consistency(_seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let start = Instant::now();
    let g = build_bary_tree(2, 2)?;
    for beta in [0.0, 0.5, 1.0] {
        let ex = exact_analysis(&ising(beta)?, &g, DEFAULT_RAW_LIMIT)?;
        let pi = stationary_distribution(&ex.generator)?;
        let err = pi
            .iter()
            .zip(ex.table.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        c.add(format!("beta={beta}: sup |pi - mu| <= 1e-10"), err <= 1e-10, json!(err));
    }
    c.within("runtime < 5 s", start, Duration::from_secs(5));
    Ok(c)
}

fn c2_infinite_temperature(_seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let graphs: [(&str, Graph); 3] = [
        ("T_2 depth 2", build_bary_tree(2, 2)?),
        ("augmented (2,2)", build_augmented_tree(2, 2)?),
        ("{3,7} ball r=1", build_hyperbolic_ball(3, 7, 1)?),
    ];
    for (name, g) in graphs {
        let l2 = exact_analysis(&ising(0.0)?, &g, DEFAULT_RAW_LIMIT)?.report.lambda2;
        c.add(format!("{name}: |lambda2 - 1| <= 1e-9"), (l2 - 1.0).abs() <= 1e-9, json!(l2));
    }
    Ok(c)
}

fn c3_discrete_relation(_seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let g = path_graph(2)?;
    let ex = exact_analysis(&ising(0.7)?, &g, DEFAULT_RAW_LIMIT)?;
    let discrete = discrete_spectral_gap(&ex.generator, &ex.table)?;
    let expected = ex.report.lambda2 / g.n() as f64;
    c.add(
        "single edge beta=0.7: gap(I + L/n) = lambda2/n within 1e-10",
        (discrete - expected).abs() <= 1e-10,
        json!({"discrete_gap": discrete, "lambda2_over_n": expected}),
    );
    Ok(c)
}

fn c4_sandwich(_seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let start = Instant::now();
    let g = build_bary_tree(2, 2)?;
    let xi = exact_cutwidth(&g)?;
    let slack = 1e-8;
    for beta in [0.2, 0.5, 1.0] {
        let m = ising(beta)?;
        let ex = exact_analysis(&m, &g, DEFAULT_RAW_LIMIT)?;
        let tau2 = ex.report.tau2;
        let lb_sum = variational_lower_bound(&ex.table, &ex.generator, &boundary_sum(&g, &ex.table)?)?;
        let lb_maj = variational_lower_bound(&ex.table, &ex.generator, &recursive_majority(&g, &ex.table)?)?;
        let paths = canonical_path_congestion(&m, &g, &xi.order, &ex.table, &ex.generator)?;
        let formula = tau2_upper_bound_ising(g.n(), xi.width, g.max_degree(), beta)?;
        let values = json!({
            "boundary_sum": lb_sum,
            "recursive_majority": lb_maj,
            "tau2": tau2,
            "canonical_path": paths.bound,
            "path_length": paths.length,
            "rho": paths.rho,
            "formula": formula,
            "xi": xi.width,
        });
        c.add(format!("beta={beta}: boundary-sum <= tau2"), lb_sum <= tau2 + slack, values.clone());
        c.add(format!("beta={beta}: recursive-majority <= tau2"), lb_maj <= tau2 + slack, Value::Null);
        c.add(format!("beta={beta}: tau2 <= L*rho"), tau2 <= paths.bound + slack, Value::Null);
        c.add(format!("beta={beta}: L*rho <= n e^((4xi+2D)beta)"), paths.bound <= formula + slack, Value::Null);
    }
    c.within("runtime < 2 min", start, Duration::from_secs(120));
    Ok(c)
}

fn c5_coloring(_seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let start = Instant::now();
    let g = build_bary_tree(2, 2)?;
    let q = g.max_degree() + 2;
    let m = Model::coloring(q)?;
    let ergodic = m.is_ergodic(&g, DEFAULT_RAW_LIMIT)?;
    c.add(format!("q={q}: ergodic"), ergodic, json!(ergodic));
    let ex = exact_analysis(&m, &g, DEFAULT_RAW_LIMIT)?;
    let xi = exact_cutwidth(&g)?.width;
    let bound = tau2_upper_bound_coloring(g.n(), xi, g.max_degree(), q)?;
    c.add(
        "tau2 <= (D+1) n (q-1)^(xi+1)",
        ex.report.tau2 <= bound,
        json!({"tau2": ex.report.tau2, "bound": bound, "states": ex.table.len(), "method": ex.report.method}),
    );
    c.within("runtime < 5 min", start, Duration::from_secs(300));
    Ok(c)
}

fn c6_cutwidth(_seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let mut widths = Vec::new();
    let mut strict = true;
    for b in [2usize, 3] {
        for r in 1..=6u32 {
            let w = dfs_tree_ordering(&build_bary_tree(b, r)?)?.width;
            let limit = (b - 1) * r as usize + 1;
            strict &= w < limit;
            widths.push(json!({"b": b, "r": r, "dfs_width": w, "limit": limit}));
        }
    }
    c.add("dfs width < (b-1)r+1 for b in {2,3}, r in 1..6", strict, json!(widths));
    let t = exact_cutwidth(&build_bary_tree(2, 2)?)?.width;
    c.add("exact cut-width of T_2 depth 2 is 2", t == 2, json!(t));
    let s = exact_cutwidth(&star_graph(3)?)?.width;
    c.add("exact cut-width of K_{1,3} is 2", s == 2, json!(s));
    let mut ratios = Vec::new();
    for r in 2..=7u32 {
        let g = build_augmented_tree(2, r)?;
        let w = hyperbolic_ordering(&g)?.width;
        ratios.push((r, g.n(), w, w as f64 / (g.n() as f64).ln()));
    }
    let max_ratio = ratios.iter().map(|x| x.3).fold(0.0, f64::max);
    let tail: Vec<f64> = ratios.iter().filter(|x| x.0 >= 4).map(|x| x.3).collect();
    let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0]);
    c.add(
        "augmented (2,r): width/ln n nonincreasing for r >= 4",
        nonincreasing,
        json!({
            "max_ratio": max_ratio,
            "rows": ratios.iter().map(|x| json!({"r": x.0, "n": x.1, "width": x.2, "ratio": x.3})).collect::<Vec<_>>(),
        }),
    );
    Ok(c)
}

/// Exact law of the broadcast: sum over the root spin and every edge flip
/// pattern, placed by table index.
fn broadcast_law(g: &Graph, gt: &GibbsTable, eps: f64) -> Result<Vec<f64>, CliError> {
    let n = g.n();
    let edges: Vec<(usize, usize)> = (0..n).filter_map(|v| g.parent(v).map(|p| (p, v))).collect();
    let mut law = vec![0.0; gt.len()];
    let mut s = vec![0u8; n];
    for root in 0..2u8 {
        for flips in 0u64..(1 << edges.len()) {
            s[g.root()] = root;
            let mut p = 0.5;
            for (k, &(a, b)) in edges.iter().enumerate() {
                let f = flips >> k & 1 == 1;
                s[b] = if f { 1 - s[a] } else { s[a] };
                p *= if f { eps } else { 1.0 - eps };
            }
            let idx = gt
                .index_of(&s)
                .ok_or_else(|| CliError::Config("broadcast configuration missing from table".into()))?;
            law[idx] += p;
        }
    }
    Ok(law)
}

fn c7_broadcast(_seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    for beta in [0.3, 0.8] {
        let g = build_bary_tree(2, 2)?;
        let gt = exact_analysis(&ising(beta)?, &g, DEFAULT_RAW_LIMIT)?.table;
        let law = broadcast_law(&g, &gt, eps_of_beta(beta))?;
        let tv = 0.5 * law.iter().zip(gt.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>();
        c.add(format!("beta={beta}: TV(broadcast, Gibbs) <= 1e-10"), tv <= 1e-10, json!(tv));
    }
    let beta: f64 = 0.6;
    let theta = beta.tanh();
    let mut worst = 0.0f64;
    for r in 1..=3 {
        let g = build_bary_tree(2, r)?;
        let gt = exact_analysis(&ising(beta)?, &g, DEFAULT_RAW_LIMIT)?.table;
        let law = broadcast_law(&g, &gt, eps_of_beta(beta))?;
        for v in 0..g.n() {
            let cov: f64 = (0..gt.len())
                .map(|i| {
                    let s = gt.config(i);
                    law[i] * ising_value(s[g.root()]) * ising_value(s[v])
                })
                .sum();
            worst = worst.max((cov - theta.powi(g.level(v) as i32)).abs());
        }
    }
    c.add("Cov(root, v) = theta^level(v) within 1e-10, r <= 3", worst <= 1e-10, json!(worst));
    Ok(c)
}

fn c8_low_temperature(_seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let theta: f64 = 0.9;
    let b = 2.0;
    let beta = beta_of_theta(theta);
    let mut taus = Vec::new();
    let mut lbs = Vec::new();
    for r in 1..=3 {
        let g = build_bary_tree(2, r)?;
        let start = Instant::now();
        let ex = exact_analysis(&ising(beta)?, &g, DEFAULT_RAW_LIMIT)?;
        if r == 3 {
            c.add(
                "2^15-state eigensolve is iterative",
                ex.report.method == "lanczos",
                json!({"method": ex.report.method, "states": ex.table.len(), "residual": ex.report.residual}),
            );
            c.within("2^15-state eigensolve < 5 min", start, Duration::from_secs(300));
        }
        taus.push(ex.report.tau2);
        lbs.push(variational_lower_bound(&ex.table, &ex.generator, &boundary_sum(&g, &ex.table)?)?);
    }
    c.add("tau2 strictly increasing in r", taus.windows(2).all(|w| w[1] > w[0]), json!(taus));
    let factor = b * theta * theta * 0.8;
    let ratios: Vec<f64> = lbs.windows(2).map(|w| w[1] / w[0]).collect();
    c.add(
        format!("boundary-sum bound grows by >= {factor:.4} per level"),
        ratios.iter().all(|&x| x >= factor),
        json!({"bounds": lbs, "ratios": ratios}),
    );
    Ok(c)
}

fn c9_high_temperature(seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let beta = beta_of_theta(0.5);
    let mut taus = Vec::new();
    for r in 1..=3 {
        taus.push(exact_analysis(&ising(beta)?, &build_bary_tree(2, r)?, DEFAULT_RAW_LIMIT)?.report.tau2);
    }
    let ratio = taus[2] / taus[0];
    c.add("theta=0.5: tau2(r=3)/tau2(r=1) <= 2", ratio <= 2.0, json!({"tau2": taus, "ratio": ratio}));
    let g = build_bary_tree(2, 6)?;
    let m = ising(beta)?;
    let mut rows = Vec::new();
    let mut any = false;
    for h in 1..=6 {
        let s = path_coupling_contraction(&m, &g, h, 2000, seed)?;
        any |= s.contracts;
        rows.push(json!({"h": h, "max_upper": s.max_upper, "contracts": s.contracts, "c": s.c}));
    }
    c.add("block coupling contracts at 95% for some h <= 6 (depth 6)", any, json!(rows));
    Ok(c)
}

fn c10_majority(seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let eps = 0.01;
    let rec = rec_majority_recursion(eps, 50)?;
    let top = rec.values.iter().copied().fold(0.0, f64::max);
    c.add("recursion at eps=0.01 stays <= 4 eps^2 (50 levels)", rec.within_threshold, json!(top));
    let g = build_bary_tree(3, 4)?;
    let samples = 1_000_000u64;
    let mut rng = stream(seed, 0);
    let mut wrong = 0u64;
    for _ in 0..samples {
        let s = broadcast_on_tree(&g, eps, &mut rng)?.0;
        if recursive_majority_value(&g, &s)? != ising_value(s[g.root()]) {
            wrong += 1;
        }
    }
    let ci = wilson(wrong, samples, Z95);
    c.add(
        "ternary depth 4, 10^6 samples: Wilson upper <= 6e-4",
        ci.high <= 6e-4,
        json!({"errors": wrong, "estimate": ci.estimate, "low": ci.low, "high": ci.high}),
    );
    Ok(c)
}

fn c11_tanh(_seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let grid: Vec<f64> = (-5000..=5000).map(|k| k as f64 * 1e-3).collect();
    for beta in [0.1, 1.0, 3.0] {
        let mut best = (f64::NEG_INFINITY, f64::NAN);
        for &h in &grid {
            let v = tanh_gap(beta, h);
            if v > best.0 {
                best = (v, h);
            }
        }
        c.add(format!("beta={beta}: grid argmax at H=0"), best.1.abs() < 1e-12, json!(best.1));
        let step = 1e-5;
        let err = grid
            .iter()
            .map(|&h| {
                let fd = (tanh_gap(beta, h + step) - tanh_gap(beta, h - step)) / (2.0 * step);
                (fd - tanh_gap_derivative(beta, h)).abs()
            })
            .fold(0.0, f64::max);
        c.add(format!("beta={beta}: derivative matches finite differences within 1e-6"), err <= 1e-6, json!(err));
    }
    Ok(c)
}

fn c12_decay(seed: u64) -> Result<Checks, CliError> {
    let mut c = Checks::new();
    let i1 = rate_function(1.0)?;
    c.add("I(1) = 0", i1 == 0.0, json!(i1));
    for delta in [3usize, 4, 7] {
        let cs = c_star(delta)?;
        let err = (rate_function(cs)? - (delta as f64).ln()).abs();
        c.add(format!("delta={delta}: |I(c*) - ln delta| <= 1e-10"), err <= 1e-10, json!({"c_star": cs, "error": err}));
    }
    let g = build_bary_tree(2, 6)?;
    let cc = 0.5 * c_star(g.max_degree())?;
    let rep = disagreement_vs_bound(&g, &[g.root()], &g.sphere(6), cc, 100_000, seed)?;
    c.add(
        "FPP from the leaves to the root (d=6): Wilson upper <= union bound",
        rep.empirical.high <= rep.union_bound,
        json!({"hits": rep.hits, "estimate": rep.empirical.estimate, "high": rep.empirical.high, "union_bound": rep.union_bound, "c": cc}),
    );
    let t = build_bary_tree(2, 3)?;
    let prof = correlation_profile(&ising(beta_of_theta(0.5))?, &t, &[t.root()], &[1, 2, 3], DEFAULT_RAW_LIMIT)?;
    c.add(
        "theta=0.5: MI(root; sphere r) strictly decreasing for r <= 3",
        prof.mi.windows(2).all(|w| w[1] < w[0]),
        json!(prof.mi),
    );
    Ok(c)
}
