//! Bounds on the relaxation time: test-function lower bounds (boundary sum,
//! recursive majority), canonical-path congestion upper bounds, the
//! recursive-majority error recursion, the tanh gap function, and a Monte
//! Carlo path-coupling contraction estimate for block dynamics.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{block_partition_overlapping, BlockSampler};
use crate::error::{Error, Result};
use crate::exact::{dirichlet_form, GeneratorMatrix, GibbsTable};
use crate::graph::Graph;
use crate::model::{broadcast_on_tree, ising_value, Model};
use crate::rng::stream;
use crate::stats::{Moments, Z95};

/// A real function on the enumerated configurations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    pub name: String,
    pub values: Vec<f64>,
    pub centered: bool,
}

impl TestFunction {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        TestFunction {
            name: name.into(),
            values,
            centered: false,
        }
    }

    /// Subtracts the μ-mean.
    pub fn centered(&self, gt: &GibbsTable) -> TestFunction {
        let mean = gt.expect(&self.values);
        TestFunction {
            name: self.name.clone(),
            values: self.values.iter().map(|x| x - mean).collect(),
            centered: true,
        }
    }
}

/// Σ of the ±1 spins on the deepest level.
pub fn boundary_sum_value(g: &Graph, spins: &[u8]) -> f64 {
    let r = g.radius();
    (0..g.n())
        .filter(|&v| g.level(v) == r)
        .map(|v| ising_value(spins[v]))
        .sum()
}

pub fn boundary_sum(g: &Graph, gt: &GibbsTable) -> Result<TestFunction> {
    if gt.alphabet_size() != 2 || gt.n_sites() != g.n() {
        return Err(Error::param("boundary sum needs a two-spin table on this graph"));
    }
    let leaves = g.sphere(g.radius());
    let values = gt.tabulate(|s| leaves.iter().map(|&v| ising_value(s[v])).sum());
    Ok(TestFunction::new("boundary-sum", values))
}

fn majority(a: i8, b: i8, c: i8) -> i8 {
    if a as i32 + b as i32 + c as i32 > 0 {
        1
    } else {
        -1
    }
}

/// Recursive-majority labels m_v ∈ {−1,+1}. On a ternary tree every vertex
/// takes the majority of its children. On a binary tree of even depth the
/// even-depth vertices take the majority of their first three grandchildren
/// (left to right); odd-depth vertices get label 0.
pub fn recursive_majority_labels(g: &Graph, spins: &[u8]) -> Result<Vec<i8>> {
    let (b, r) = g
        .bary_shape()
        .ok_or_else(|| Error::param("recursive majority needs a complete b-ary tree"))?;
    let mut m = vec![0i8; g.n()];
    match b {
        3 => {
            for v in (0..g.n()).rev() {
                let kids = g.children(v);
                m[v] = if kids.is_empty() {
                    ising_value(spins[v]) as i8
                } else {
                    majority(m[kids[0]], m[kids[1]], m[kids[2]])
                };
            }
        }
        2 if r % 2 == 0 => {
            for v in (0..g.n()).rev() {
                let l = g.level(v);
                if l % 2 == 1 {
                    continue;
                }
                if l == r {
                    m[v] = ising_value(spins[v]) as i8;
                } else {
                    let grand: Vec<usize> = g.children(v).iter().flat_map(|&c| g.children(c)).collect();
                    m[v] = majority(m[grand[0]], m[grand[1]], m[grand[2]]);
                }
            }
        }
        2 => return Err(Error::param("binary recursive majority needs even depth")),
        _ => return Err(Error::param("recursive majority needs b = 2 or b = 3")),
    }
    Ok(m)
}

pub fn recursive_majority_value(g: &Graph, spins: &[u8]) -> Result<f64> {
    Ok(recursive_majority_labels(g, spins)?[g.root()] as f64)
}

/// Root label of recursive majority as a function on the table.
pub fn recursive_majority(g: &Graph, gt: &GibbsTable) -> Result<TestFunction> {
    recursive_majority_labels(g, &vec![0; g.n()])?;
    let values = gt.tabulate(|s| recursive_majority_value(g, s).expect("shape checked"));
    Ok(TestFunction::new("recursive-majority", values))
}

/// μ[f²]/E[f,f] for f centered against μ; a lower bound on τ2.
pub fn variational_lower_bound(gt: &GibbsTable, gen: &GeneratorMatrix, f: &TestFunction) -> Result<f64> {
    let fc = f.centered(gt);
    let sq: Vec<f64> = fc.values.iter().map(|x| x * x).collect();
    let var = gt.expect(&sq);
    let e = dirichlet_form(gen, gt, &fc.values)?;
    if e <= 0.0 {
        return Err(Error::param(format!("test function `{}` is constant", f.name)));
    }
    Ok(var / e)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionReport {
    pub eps: f64,
    pub values: Vec<f64>,
    pub threshold: f64,
    pub within_threshold: bool,
}

/// p̄_0 = 0, p̄_ℓ = 3ε² + 6εp̄_{ℓ−1} + 3p̄_{ℓ−1}², compared with 4ε².
pub fn rec_majority_recursion(eps: f64, levels: usize) -> Result<RecursionReport> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::param("eps must lie in [0, 1/2]"));
    }
    let mut values = vec![0.0];
    for _ in 0..levels {
        let p = *values.last().unwrap();
        values.push(3.0 * eps * eps + 6.0 * eps * p + 3.0 * p * p);
    }
    let threshold = 4.0 * eps * eps;
    let within_threshold = values.iter().all(|&p| p <= threshold);
    Ok(RecursionReport {
        eps,
        values,
        threshold,
        within_threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorityCut {
    /// Σ μ(σ)q(σ→τ) over moves from {m = +1} to {m = −1}.
    pub flow: f64,
    pub plus_mass: f64,
    /// μ(m=+1)μ(m=−1)/flow, the variational bound of the cut indicator.
    pub bound: f64,
    /// (2ε + 8ε²)^{1−r}.
    pub closed_form: f64,
}

pub fn rec_majority_cut_bound(g: &Graph, gt: &GibbsTable, gen: &GeneratorMatrix, eps: f64) -> Result<MajorityCut> {
    let (_, r) = g
        .bary_shape()
        .ok_or_else(|| Error::param("cut bound needs a complete b-ary tree"))?;
    let label = recursive_majority(g, gt)?.values;
    let mut flow = 0.0;
    let mut plus = 0.0;
    for i in 0..gt.len() {
        if label[i] > 0.0 {
            plus += gt.prob(i);
            for (j, q) in gen.row(i) {
                if label[j] < 0.0 {
                    flow += gt.prob(i) * q;
                }
            }
        }
    }
    if flow <= 0.0 {
        return Err(Error::param("majority cut carries no flow"));
    }
    Ok(MajorityCut {
        flow,
        plus_mass: plus,
        bound: plus * (1.0 - plus) / flow,
        closed_form: (2.0 * eps + 8.0 * eps * eps).powi(1 - r as i32),
    })
}

/// Largest state space for the all-pairs canonical path computation.
pub const CANONICAL_PATH_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalPathReport {
    /// Longest canonical path (number of moves).
    pub length: usize,
    /// max over moves e of Σ_{paths through e} μ(σ)μ(η) / (μ(e⁻)q(e)).
    pub rho: f64,
    pub bound: f64,
}

/// Canonical paths: walk through `order`, fixing the first vertex where the
/// current configuration differs from the target. When the target spin is
/// blocked by a neighbour, the earliest blocking neighbour first moves to the
/// smallest spin compatible with both the target spin and its own
/// neighbourhood.
pub fn canonical_path_congestion(m: &Model, g: &Graph, order: &[usize], gt: &GibbsTable, gen: &GeneratorMatrix) -> Result<CanonicalPathReport> {
    let dim = gt.len();
    if dim > CANONICAL_PATH_LIMIT {
        return Err(Error::Size {
            what: "state space for canonical paths",
            actual: dim as u128,
            limit: CANONICAL_PATH_LIMIT as u128,
        });
    }
    let n = g.n();
    if order.len() != n {
        return Err(Error::param("ordering length differs from vertex count"));
    }
    let mut rank = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || rank[v] != usize::MAX {
            return Err(Error::param("ordering is not a permutation"));
        }
        rank[v] = i;
    }
    let q = m.alphabet_size() as u8;
    let max_steps = (g.max_degree() + 1) * n;
    let mut load = vec![0.0; gen.nnz_offdiag()];
    let mut length = 0;
    let mut cur = vec![0u8; n];
    for s in 0..dim {
        for t in 0..dim {
            if s == t {
                continue;
            }
            let target = gt.config(t);
            cur.copy_from_slice(gt.config(s));
            let mut idx = s;
            let mut steps = 0;
            let weight = gt.prob(s) * gt.prob(t);
            while let Some(&i) = order.iter().find(|&&v| cur[v] != target[v]) {
                let (v, a) = match gt.neighbor_index(idx, i, target[i]) {
                    Some(_) => (i, target[i]),
                    None => {
                        let blocker = g
                            .neighbors(i)
                            .iter()
                            .copied()
                            .filter(|&w| m.alpha(target[i], cur[w]) == 0.0)
                            .min_by_key(|&w| rank[w])
                            .ok_or_else(|| Error::param("canonical path blocked without a blocking neighbour"))?;
                        let c = (0..q)
                            .find(|&c| {
                                c != cur[blocker]
                                    && m.alpha(c, target[i]) > 0.0
                                    && gt.neighbor_index(idx, blocker, c).is_some()
                            })
                            .ok_or_else(|| Error::param("no detour spin available"))?;
                        (blocker, c)
                    }
                };
                let next = gt.neighbor_index(idx, v, a).expect("checked legal");
                let pos = gen
                    .entry_position(idx, next)
                    .ok_or_else(|| Error::param("canonical path step is not a generator move"))?;
                load[pos] += weight;
                cur[v] = a;
                idx = next;
                steps += 1;
                if steps > max_steps {
                    return Err(Error::param("canonical path exceeded its length budget"));
                }
            }
            length = length.max(steps);
        }
    }
    let mut rho = 0.0f64;
    for i in 0..dim {
        for (j, rate) in gen.row(i) {
            let pos = gen.entry_position(i, j).unwrap();
            if load[pos] > 0.0 {
                rho = rho.max(load[pos] / (gt.prob(i) * rate));
            }
        }
    }
    Ok(CanonicalPathReport {
        length,
        rho,
        bound: length as f64 * rho,
    })
}

/// tanh(H+β) − tanh(H−β).
pub fn tanh_gap(beta: f64, h: f64) -> f64 {
    (h + beta).tanh() - (h - beta).tanh()
}

/// ∂/∂H of [`tanh_gap`]: cosh⁻²(H+β) − cosh⁻²(H−β).
pub fn tanh_gap_derivative(beta: f64, h: f64) -> f64 {
    (h + beta).cosh().powi(-2) - (h - beta).cosh().powi(-2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthContraction {
    pub depth: u32,
    pub vertex: usize,
    /// d(σ,η) = λ^depth for the single discrepancy
    pub distance: f64,
    pub mean_delta: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// blocks containing the vertex (each erases the discrepancy)
    pub erasing_blocks: usize,
    /// blocks that avoid the vertex but touch a neighbour
    pub boundary_blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingStats {
    pub b: usize,
    pub r: u32,
    pub h: u32,
    pub theta: f64,
    pub lambda: f64,
    pub blocks: usize,
    pub reps: usize,
    pub seed: u64,
    pub depths: Vec<DepthContraction>,
    /// max over depths of the upper 95% confidence edge of E[Δd]
    pub max_upper: f64,
    pub contracts: bool,
    /// some depth has an interval straddling zero
    pub wide_interval: bool,
    /// N · min over depths of −E[Δd]/d
    pub c: f64,
    pub gap_bound: f64,
}

/// Expected one-move change of the weighted Hamming distance
/// d = Σ λ^{|v|} 1[σ_v ≠ η_v], λ = 1/√b, for pairs differing at the
/// leftmost vertex of each depth, under a uniformly chosen overlapping block
/// move. σ is an exact Gibbs sample; both chains resample the block top-down
/// with shared uniforms. Blocks neither containing nor touching the
/// discrepancy leave d unchanged and are skipped; the rest are estimated
/// separately (`reps` draws each) and combined with weight 1/N.
pub fn path_coupling_contraction(m: &Model, g: &Graph, h: u32, reps: usize, seed: u64) -> Result<CouplingStats> {
    let theta = m
        .theta()
        .ok_or_else(|| Error::param("path coupling estimate is defined for the Ising model"))?;
    if m.has_field() {
        return Err(Error::param("path coupling estimate needs a model without field"));
    }
    if reps < 2 {
        return Err(Error::param("need at least two replicas"));
    }
    let (b, r) = g
        .bary_shape()
        .ok_or_else(|| Error::param("path coupling needs a complete b-ary tree"))?;
    let eps = m.eps().unwrap();
    let lambda = 1.0 / (b as f64).sqrt();
    let weight: Vec<f64> = (0..g.n()).map(|v| lambda.powi(g.level(v) as i32)).collect();
    let partition = block_partition_overlapping(g, h)?;
    let samplers = partition
        .blocks
        .iter()
        .map(|blk| BlockSampler::new(m, g, blk))
        .collect::<Result<Vec<_>>>()?;
    let nblocks = samplers.len();
    let mut depths = Vec::new();
    for depth in 0..=r {
        let v = g.sphere(depth)[0];
        let touching: Vec<usize> = (0..nblocks)
            .filter(|&k| {
                let blk = &partition.blocks[k];
                blk.contains(&v) || g.neighbors(v).iter().any(|w| blk.contains(w))
            })
            .collect();
        let erasing = touching
            .iter()
            .filter(|&&k| partition.blocks[k].contains(&v))
            .count();
        let per_block: Vec<Result<Moments>> = touching
            .par_iter()
            .map(|&k| {
                let sampler = &samplers[k];
                let mut rng = stream(seed, ((depth as u64) << 32) | k as u64);
                let mut mom = Moments::default();
                let mut u = vec![0.0; sampler.uniforms_needed()];
                let in_block = sampler.vertices().contains(&v);
                for _ in 0..reps {
                    let mut sigma = broadcast_on_tree(g, eps, &mut rng)?.0;
                    let mut eta = sigma.clone();
                    eta[v] = 1 - eta[v];
                    u.iter_mut().for_each(|x| *x = rand::Rng::random(&mut rng));
                    sampler.resample_with(m, &mut sigma, &u)?;
                    sampler.resample_with(m, &mut eta, &u)?;
                    let mut after: f64 = sampler
                        .vertices()
                        .iter()
                        .filter(|&&w| sigma[w] != eta[w])
                        .map(|&w| weight[w])
                        .sum();
                    if !in_block {
                        after += weight[v];
                    }
                    mom.push(after - weight[v]);
                }
                Ok(mom)
            })
            .collect();
        let mut mean = 0.0;
        let mut var = 0.0;
        for mom in per_block {
            let mom = mom?;
            mean += mom.mean();
            var += mom.std_err().powi(2);
        }
        mean /= nblocks as f64;
        let half = Z95 * var.sqrt() / nblocks as f64;
        depths.push(DepthContraction {
            depth,
            vertex: v,
            distance: weight[v],
            mean_delta: mean,
            ci_low: mean - half,
            ci_high: mean + half,
            erasing_blocks: erasing,
            boundary_blocks: touching.len() - erasing,
        });
    }
    let max_upper = depths.iter().map(|d| d.ci_high).fold(f64::NEG_INFINITY, f64::max);
    let wide_interval = depths.iter().any(|d| d.ci_low < 0.0 && d.ci_high > 0.0);
    let c = nblocks as f64
        * depths
            .iter()
            .map(|d| -d.mean_delta / d.distance)
            .fold(f64::INFINITY, f64::min);
    Ok(CouplingStats {
        b,
        r,
        h,
        theta,
        lambda,
        blocks: nblocks,
        reps,
        seed,
        depths,
        max_upper,
        contracts: max_upper < 0.0,
        wide_interval,
        c,
        gap_bound: (c / nblocks as f64).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_analysis, DEFAULT_RAW_LIMIT};
    use crate::graph::build_bary_tree;

    #[test]
    fn majority_examples() {
        let t = build_bary_tree(3, 1).unwrap();
        assert_eq!(recursive_majority_value(&t, &[1, 1, 1, 1]).unwrap(), 1.0);
        assert_eq!(recursive_majority_value(&t, &[1, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(recursive_majority_value(&t, &[1, 0, 0, 1]).unwrap(), -1.0);
        let bin = build_bary_tree(2, 2).unwrap();
        // grandchildren of the root are 3, 4, 5 (6 is ignored)
        assert_eq!(recursive_majority_value(&bin, &[0, 0, 0, 1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(recursive_majority_value(&bin, &[0, 0, 0, 1, 0, 0, 1]).unwrap(), -1.0);
        assert!(recursive_majority_labels(&build_bary_tree(2, 3).unwrap(), &[0; 15]).is_err());
    }

    #[test]
    fn recursion_examples() {
        let r = rec_majority_recursion(0.0, 5).unwrap();
        assert!(r.values.iter().all(|&p| p == 0.0));
        let r = rec_majority_recursion(0.01, 10).unwrap();
        assert!(r.within_threshold);
        assert_eq!(r.values.len(), 11);
    }

    #[test]
    fn single_spin_bound_at_infinite_temperature() {
        let t = build_bary_tree(2, 1).unwrap();
        let ex = exact_analysis(&Model::ising(0.0).unwrap(), &t, DEFAULT_RAW_LIMIT).unwrap();
        let f = TestFunction::new("spin", ex.table.tabulate(|s| ising_value(s[1])));
        let lb = variational_lower_bound(&ex.table, &ex.generator, &f).unwrap();
        assert!((lb - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_gap_examples() {
        for beta in [0.1, 1.0, 3.0] {
            assert!((tanh_gap(beta, 0.0) - 2.0 * f64::tanh(beta)).abs() < 1e-15);
            assert!((tanh_gap(beta, 0.7) - tanh_gap(beta, -0.7)).abs() < 1e-15);
        }
    }

    #[test]
    fn canonical_path_single_vertex() {
        let t = build_bary_tree(2, 0).unwrap();
        let m = Model::ising(0.4).unwrap();
        let ex = exact_analysis(&m, &t, DEFAULT_RAW_LIMIT).unwrap();
        let rep = canonical_path_congestion(&m, &t, &[0], &ex.table, &ex.generator).unwrap();
        assert_eq!(rep.length, 1);
        assert!(rep.bound >= ex.report.tau2 - 1e-12);
    }
}
