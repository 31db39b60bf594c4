//! Decay of correlations: the exponential large-deviation rate I(c), the
//! critical speed c*, the two-term covariance bounds driven by the spectral
//! gap, exact and sampled correlation / mutual-information profiles, and the
//! first-passage disagreement experiment.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::fpp_disagreement_time;
use crate::error::{Error, Result};
use crate::exact::{enumerate_gibbs, joint_distribution, JointTable};
use crate::graph::Graph;
use crate::model::{broadcast_on_tree, Model};
use crate::rng::stream;
use crate::stats::{fit_exponential, wilson, ExpFit, Interval, Z95};

/// I(c) = c − ln c − 1.
pub fn rate_function(c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param(format!("rate function needs c > 0, got {c}")));
    }
    Ok(c - c.ln() - 1.0)
}

/// The unique c ∈ (0,1) with I(c) = ln Δ.
pub fn c_star(delta: usize) -> Result<f64> {
    if delta < 2 {
        return Err(Error::param(format!("c_star needs delta >= 2, got {delta}")));
    }
    let target = (delta as f64).ln();
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid - mid.ln() - 1.0 > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// C(c,Δ) = (1 − e^{ln Δ − I(c)})^{−1/2}; infinite when I(c) ≤ ln Δ.
pub fn constant_c(c: f64, delta: usize) -> Result<f64> {
    let x = (delta as f64).ln() - rate_function(c)?;
    if x >= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 - x.exp()).powf(-0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateParams {
    pub c: f64,
    pub delta: usize,
    pub i_of_c: f64,
    pub c_star: f64,
    pub c_of_c_delta: f64,
}

impl RateParams {
    pub fn new(c: f64, delta: usize) -> Result<Self> {
        Ok(RateParams {
            c,
            delta,
            i_of_c: rate_function(c)?,
            c_star: c_star(delta)?,
            c_of_c_delta: constant_c(c, delta)?,
        })
    }

    /// The speed e^{−ln Δ − γ − 2}.
    pub fn from_gamma(gamma: f64, delta: usize) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::param("gamma must be >= 0"));
        }
        RateParams::new((-(delta as f64).ln() - gamma - 2.0).exp(), delta)
    }
}

/// e^{−cdλ2} + 2C(c,Δ)·sqrt(|∂_iA| e^{d(ln Δ − I(c))}).
pub fn decay_bound(c: f64, delta: usize, d: u32, lambda2: f64, boundary_size: usize) -> Result<f64> {
    let cs = c_star(delta)?;
    if !(c > 0.0 && c < cs) {
        return Err(Error::param(format!("decay bound needs 0 < c < c* = {cs}")));
    }
    let d = d as f64;
    let exponent = d * ((delta as f64).ln() - rate_function(c)?);
    Ok((-c * d * lambda2).exp() + 2.0 * constant_c(c, delta)? * (boundary_size as f64 * exponent.exp()).sqrt())
}

/// e^{−dλ2 e^{−ln Δ−γ−2}} + 4·sqrt(e^{−(γ+1)d} |∂_iA|).
pub fn decay_bound_gamma(gamma: f64, d: u32, lambda2: f64, delta: usize, boundary_size: usize) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::param("gamma must be >= 0"));
    }
    let d = d as f64;
    let speed = (-(delta as f64).ln() - gamma - 2.0).exp();
    Ok((-d * lambda2 * speed).exp() + 4.0 * ((-(gamma + 1.0) * d).exp() * boundary_size as f64).sqrt())
}

/// |∂_iA|·C(c,Δ)²·e^{d(ln Δ − I(c))}, infinite for c ≥ c*.
pub fn union_bound(c: f64, delta: usize, d: u32, boundary_size: usize) -> Result<f64> {
    let cc = constant_c(c, delta)?;
    if cc.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let exponent = d as f64 * ((delta as f64).ln() - rate_function(c)?);
    Ok(boundary_size as f64 * cc * cc * exponent.exp())
}

/// Vertices of A with a neighbour outside A.
pub fn inner_boundary(g: &Graph, a: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; g.n()];
    a.iter().for_each(|&v| inside[v] = true);
    let mut out: Vec<usize> = a
        .iter()
        .copied()
        .filter(|&v| g.neighbors(v).iter().any(|&w| !inside[w]))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Largest correlation between a function of the row variable and a
/// function of the column variable: the second singular value of
/// D_x^{−1/2} P D_y^{−1/2}.
pub fn maximal_correlation(joint: &JointTable) -> f64 {
    let pr = joint.row_marginal();
    let pc = joint.col_marginal();
    let rows: Vec<usize> = (0..joint.rows).filter(|&r| pr[r] > 0.0).collect();
    let cols: Vec<usize> = (0..joint.cols).filter(|&c| pc[c] > 0.0).collect();
    if rows.len() < 2 || cols.len() < 2 {
        return 0.0;
    }
    let mut b = DMatrix::<f64>::zeros(rows.len(), cols.len());
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            b[(i, j)] = joint.p[r * joint.cols + c] / (pr[r] * pc[c]).sqrt();
        }
    }
    let mut sv: Vec<f64> = b.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv.get(1).copied().unwrap_or(0.0).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub method: String,
    pub distances: Vec<u32>,
    /// maximal normalised covariance between σ_A and the sphere σ_r
    pub cov: Vec<f64>,
    /// I(σ_A; σ_r) in nats (exact method only)
    pub mi: Vec<f64>,
    pub cov_fit: Option<ExpFit>,
    pub mi_fit: Option<ExpFit>,
}

impl DecayProfile {
    pub fn fitted_rate(&self) -> Option<f64> {
        self.cov_fit.map(|f| f.rate)
    }
}

fn check_sets(g: &Graph, a: &[usize], radii: &[u32]) -> Result<()> {
    if a.is_empty() || a.iter().any(|&v| v >= g.n()) {
        return Err(Error::param("vertex set A is empty or out of range"));
    }
    if let Some(&r) = radii.iter().find(|&&r| r > g.radius()) {
        return Err(Error::param(format!("radius {r} exceeds graph radius {}", g.radius())));
    }
    Ok(())
}

fn fits(distances: &[u32], cov: &[f64], mi: &[f64]) -> (Option<ExpFit>, Option<ExpFit>) {
    let xs: Vec<f64> = distances.iter().map(|&d| d as f64).collect();
    let mi_fit = if mi.is_empty() { None } else { fit_exponential(&xs, mi) };
    (fit_exponential(&xs, cov), mi_fit)
}

/// Exact correlation and mutual-information profile between σ_A and the
/// spheres σ_r around the root.
pub fn correlation_profile(m: &Model, g: &Graph, a: &[usize], radii: &[u32], raw_limit: u64) -> Result<DecayProfile> {
    check_sets(g, a, radii)?;
    let gt = enumerate_gibbs(m, g, raw_limit)?;
    let mut cov = Vec::new();
    let mut mi = Vec::new();
    for &r in radii {
        let joint = joint_distribution(&gt, a, &g.sphere(r))?;
        cov.push(maximal_correlation(&joint));
        mi.push(joint.mutual_information());
    }
    let (cov_fit, mi_fit) = fits(radii, &cov, &mi);
    Ok(DecayProfile {
        method: "exact".into(),
        distances: radii.to_vec(),
        cov,
        mi,
        cov_fit,
        mi_fit,
    })
}

/// Same profile; mutual information is only available exactly.
pub fn mutual_info_profile(m: &Model, g: &Graph, a: &[usize], radii: &[u32], raw_limit: u64) -> Result<DecayProfile> {
    correlation_profile(m, g, a, radii, raw_limit)
}

/// Sampled correlation profile for the field-free Ising model on a tree:
/// the maximal correlation of the empirical joint law of (σ_A, σ_r) built
/// from exact broadcast samples.
pub fn correlation_profile_mc(m: &Model, g: &Graph, a: &[usize], radii: &[u32], samples: usize, seed: u64) -> Result<DecayProfile> {
    check_sets(g, a, radii)?;
    let eps = m
        .eps()
        .filter(|_| !m.has_field())
        .ok_or_else(|| Error::param("sampled profile needs the Ising model without field"))?;
    let mut counts: Vec<Vec<f64>> = Vec::new();
    let spheres: Vec<Vec<usize>> = radii.iter().map(|&r| g.sphere(r)).collect();
    for s in &spheres {
        let cells = 1u128 << (a.len() + s.len()).min(127);
        if cells > crate::exact::JOINT_LIMIT {
            return Err(Error::Size {
                what: "sampled joint table",
                actual: cells,
                limit: crate::exact::JOINT_LIMIT,
            });
        }
        counts.push(vec![0.0; cells as usize]);
    }
    let mut rng = stream(seed, 0);
    let code = |s: &[u8], set: &[usize]| set.iter().fold(0usize, |acc, &v| acc * 2 + s[v] as usize);
    for _ in 0..samples {
        let s = broadcast_on_tree(g, eps, &mut rng)?.0;
        for (k, sph) in spheres.iter().enumerate() {
            counts[k][(code(&s, a) << sph.len()) | code(&s, sph)] += 1.0;
        }
    }
    let cov = spheres
        .iter()
        .zip(&counts)
        .map(|(sph, c)| {
            let joint = JointTable {
                rows: 1 << a.len(),
                cols: 1 << sph.len(),
                p: c.iter().map(|x| x / samples as f64).collect(),
            };
            maximal_correlation(&joint)
        })
        .collect::<Vec<_>>();
    let (cov_fit, _) = fits(radii, &cov, &[]);
    Ok(DecayProfile {
        method: "monte-carlo".into(),
        distances: radii.to_vec(),
        cov,
        mi: Vec::new(),
        cov_fit,
        mi_fit: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisagreementReport {
    pub d: u32,
    pub delta: usize,
    pub c: f64,
    pub time: f64,
    pub inner_boundary: Vec<usize>,
    pub reps: usize,
    pub hits: u64,
    pub empirical: Interval,
    pub union_bound: f64,
}

const FPP_CHUNKS: usize = 64;

/// Empirical P(t_A ≤ c·d) for first-passage disagreement from B against
/// the path-counting union bound.
pub fn disagreement_vs_bound(g: &Graph, a: &[usize], b: &[usize], c: f64, reps: usize, seed: u64) -> Result<DisagreementReport> {
    let d = g
        .set_distance(a, b)
        .ok_or_else(|| Error::param("sets are not connected"))?;
    let delta = g.max_degree();
    let boundary = inner_boundary(g, a);
    let bound = union_bound(c, delta, d, boundary.len())?;
    let time = c * d as f64;
    let hits: Vec<Result<u64>> = (0..FPP_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream(seed, chunk as u64);
            let count = reps / FPP_CHUNKS + usize::from(chunk < reps % FPP_CHUNKS);
            let mut hits = 0;
            for _ in 0..count {
                if fpp_disagreement_time(g, b, a, &mut rng)? <= time {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();
    let hits = hits.into_iter().sum::<Result<u64>>()?;
    Ok(DisagreementReport {
        d,
        delta,
        c,
        time,
        inner_boundary: boundary,
        reps,
        hits,
        empirical: wilson(hits, reps as u64, Z95),
        union_bound: bound,
    })
}
