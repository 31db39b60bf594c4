//! Simulation: continuous and discrete time single-site heat-bath dynamics,
//! block dynamics, coupled pairs of chains and first-passage disagreement
//! times.
//!
//! Continuous time uses a global exponential race: the next ring comes after
//! an Exp(n) wait at a uniform vertex, which is the same law as independent
//! rate-1 clocks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{inverse_cdf, Configuration, Model};
use crate::rng::{exp1, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub vertex: usize,
    pub spin: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventLog {
    pub seed: u64,
    pub stream: u64,
    pub t_end: f64,
    pub initial: Configuration,
    pub events: Vec<Event>,
    #[serde(rename = "final")]
    pub final_config: Configuration,
}

impl EventLog {
    /// Applies the events to the initial configuration.
    pub fn replay(&self) -> Configuration {
        let mut s = self.initial.clone();
        for e in &self.events {
            s.0[e.vertex] = e.spin;
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,vertex,spin\n");
        for e in &self.events {
            out.push_str(&format!("{},{},{}\n", e.time, e.vertex, e.spin));
        }
        out
    }
}

fn check_legal(m: &Model, g: &Graph, init: &Configuration) -> Result<()> {
    if m.gibbs_weight(g, init)? <= 0.0 {
        return Err(Error::param("initial configuration is not legal"));
    }
    Ok(())
}

/// Continuous-time heat-bath dynamics up to `t_end`, recording every ring.
pub fn simulate_ct(m: &Model, g: &Graph, init: &Configuration, t_end: f64, seed: u64, stream_id: u64) -> Result<EventLog> {
    if !(t_end > 0.0) {
        return Err(Error::param("t_end must be positive"));
    }
    check_legal(m, g, init)?;
    let mut rng = stream(seed, stream_id);
    let n = g.n();
    let mut s = init.0.clone();
    let mut buf = vec![0.0; m.alphabet_size()];
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp1(&mut rng) / n as f64;
        if t > t_end {
            break;
        }
        let v = rng.random_range(0..n);
        let u: f64 = rng.random();
        heat_bath(m, g, &mut s, v, u, &mut buf)?;
        events.push(Event {
            time: t,
            vertex: v,
            spin: s[v],
        });
    }
    Ok(EventLog {
        seed,
        stream: stream_id,
        t_end,
        initial: init.clone(),
        events,
        final_config: Configuration(s),
    })
}

#[inline]
fn heat_bath(m: &Model, g: &Graph, s: &mut [u8], v: usize, u: f64, buf: &mut [f64]) -> Result<()> {
    let total = m.local_weights(g, s, v, buf);
    if total <= 0.0 {
        return Err(Error::FrozenSite { vertex: v });
    }
    s[v] = inverse_cdf(&buf[..m.alphabet_size()], total, u);
    Ok(())
}

/// Discrete-time chain M = I + 𝓛/n: each step resamples a uniform vertex.
pub fn simulate_discrete<R: Rng + ?Sized>(m: &Model, g: &Graph, init: &Configuration, steps: u64, rng: &mut R) -> Result<Configuration> {
    check_legal(m, g, init)?;
    let mut s = init.0.clone();
    let mut buf = vec![0.0; m.alphabet_size()];
    for _ in 0..steps {
        let v = rng.random_range(0..g.n());
        let u: f64 = rng.random();
        heat_bath(m, g, &mut s, v, u, &mut buf)?;
    }
    Ok(Configuration(s))
}

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockScheme {
    DisjointSubtree,
    OverlappingHeight,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockPartition {
    pub scheme: BlockScheme,
    pub h: Option<u32>,
    pub blocks: Vec<Vec<usize>>,
}

impl BlockPartition {
    /// Number of blocks containing each vertex.
    pub fn multiplicity(&self, n: usize) -> Vec<usize> {
        let mut count = vec![0; n];
        for b in &self.blocks {
            for &v in b {
                count[v] += 1;
            }
        }
        count
    }
}

/// Singletons above depth `n_top` and the full subtrees rooted at depth
/// `n_top`.
pub fn block_partition_disjoint(g: &Graph, n_top: u32) -> Result<BlockPartition> {
    let (_, depth) = g
        .bary_shape()
        .ok_or_else(|| Error::param("disjoint blocks need a complete b-ary tree"))?;
    if n_top > depth {
        return Err(Error::param(format!("n_top {n_top} exceeds tree depth {depth}")));
    }
    let mut blocks: Vec<Vec<usize>> = (0..g.n())
        .filter(|&v| g.level(v) < n_top)
        .map(|v| vec![v])
        .collect();
    for v in g.sphere(n_top) {
        blocks.push(g.subtree(v, depth - n_top));
    }
    Ok(BlockPartition {
        scheme: BlockScheme::DisjointSubtree,
        h: None,
        blocks,
    })
}

/// Height-h subtrees of the tree viewed inside a taller tree: one block per
/// vertex, plus one for each of the h phantom ancestors of the root (the
/// ancestor k levels up covers depths `<= h - k`).
pub fn block_partition_overlapping(g: &Graph, h: u32) -> Result<BlockPartition> {
    if g.bary_shape().is_none() {
        return Err(Error::param("overlapping blocks need a complete b-ary tree"));
    }
    let mut blocks: Vec<Vec<usize>> = (0..g.n()).map(|v| g.subtree(v, h)).collect();
    for k in 1..=h {
        blocks.push(g.subtree(g.root(), h - k));
    }
    Ok(BlockPartition {
        scheme: BlockScheme::OverlappingHeight,
        h: Some(h),
        blocks,
    })
}

/// Largest number of joint block states sampled by enumeration.
pub const BLOCK_ENUM_LIMIT: u64 = 1 << 16;

/// Precomputed sampler for the conditional law on one block.
#[derive(Debug, Clone)]
pub struct BlockSampler {
    vertices: Vec<usize>,
    /// neighbours of each block vertex outside the block
    outside: Vec<Vec<usize>>,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    /// `parent[i]` is the position of the tree parent of position `i`;
    /// positions are in BFS order from position 0.
    Tree { parent: Vec<Option<usize>> },
    /// Internal edges as position pairs.
    Enumerate { edges: Vec<(usize, usize)> },
}

impl BlockSampler {
    pub fn new(m: &Model, g: &Graph, block: &[usize]) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::param("empty block"));
        }
        let mut pos = vec![usize::MAX; g.n()];
        for (i, &v) in block.iter().enumerate() {
            if v >= g.n() || pos[v] != usize::MAX {
                return Err(Error::param("block has repeated or invalid vertices"));
            }
            pos[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in block.iter().enumerate() {
            for &w in g.neighbors(v) {
                if pos[w] != usize::MAX && i < pos[w] {
                    edges.push((i, pos[w]));
                }
            }
        }
        // BFS inside the block from its first vertex
        let mut order = vec![block[0]];
        let mut parent_of = vec![None];
        let mut seen = vec![false; block.len()];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            for &w in g.neighbors(v) {
                let p = pos[w];
                if p != usize::MAX && !seen[p] {
                    seen[p] = true;
                    order.push(w);
                    parent_of.push(Some(head));
                }
            }
            head += 1;
        }
        let connected = order.len() == block.len();
        let kind;
        let vertices;
        if connected && edges.len() + 1 == block.len() {
            vertices = order;
            kind = SamplerKind::Tree { parent: parent_of };
        } else {
            let q = m.alphabet_size() as u64;
            let states = q.checked_pow(block.len() as u32);
            if states.is_none_or(|s| s > BLOCK_ENUM_LIMIT) {
                return Err(Error::Size {
                    what: "non-tree block state count",
                    actual: (q as u128).saturating_pow(block.len() as u32),
                    limit: BLOCK_ENUM_LIMIT as u128,
                });
            }
            vertices = block.to_vec();
            kind = SamplerKind::Enumerate { edges };
        }
        let inside: std::collections::HashSet<usize> = block.iter().copied().collect();
        let outside = vertices
            .iter()
            .map(|&v| {
                g.neighbors(v)
                    .iter()
                    .copied()
                    .filter(|w| !inside.contains(w))
                    .collect()
            })
            .collect();
        Ok(BlockSampler {
            vertices,
            outside,
            kind,
        })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn is_tree(&self) -> bool {
        matches!(self.kind, SamplerKind::Tree { .. })
    }

    /// Number of uniforms consumed by one draw.
    pub fn uniforms_needed(&self) -> usize {
        match self.kind {
            SamplerKind::Tree { .. } => self.vertices.len(),
            SamplerKind::Enumerate { .. } => 1,
        }
    }

    fn local_field(&self, m: &Model, s: &[u8], i: usize) -> Vec<f64> {
        let v = self.vertices[i];
        (0..m.alphabet_size() as u8)
            .map(|a| {
                self.outside[i]
                    .iter()
                    .fold(m.field_weight(v, a), |w, &u| w * m.alpha(a, s[u]))
            })
            .collect()
    }

    /// Exact conditional draw on the block given the spins outside it,
    /// driven by the supplied uniforms (see [`Self::uniforms_needed`]).
    pub fn resample_with(&self, m: &Model, s: &mut [u8], uniforms: &[f64]) -> Result<()> {
        let q = m.alphabet_size();
        match &self.kind {
            SamplerKind::Tree { parent } => {
                let k = self.vertices.len();
                let mut belief: Vec<Vec<f64>> = (0..k).map(|i| self.local_field(m, s, i)).collect();
                for i in (1..k).rev() {
                    let p = parent[i].expect("non-root position has a parent");
                    let mut msg = vec![0.0; q];
                    for (ap, slot) in msg.iter_mut().enumerate() {
                        *slot = (0..q)
                            .map(|a| m.alpha(ap as u8, a as u8) * belief[i][a])
                            .sum();
                    }
                    let norm: f64 = msg.iter().sum();
                    if norm <= 0.0 {
                        return Err(Error::FrozenSite {
                            vertex: self.vertices[i],
                        });
                    }
                    for a in 0..q {
                        belief[p][a] *= msg[a] / norm;
                    }
                }
                let mut w = vec![0.0; q];
                for i in 0..k {
                    for a in 0..q {
                        w[a] = belief[i][a]
                            * match parent[i] {
                                Some(p) => m.alpha(s[self.vertices[p]], a as u8),
                                None => 1.0,
                            };
                    }
                    let total: f64 = w.iter().sum();
                    if total <= 0.0 {
                        return Err(Error::FrozenSite {
                            vertex: self.vertices[i],
                        });
                    }
                    s[self.vertices[i]] = inverse_cdf(&w, total, uniforms[i]);
                }
                Ok(())
            }
            SamplerKind::Enumerate { edges } => {
                let k = self.vertices.len();
                let fields: Vec<Vec<f64>> = (0..k).map(|i| self.local_field(m, s, i)).collect();
                let states = q.pow(k as u32);
                let mut weights = Vec::with_capacity(states);
                let mut assign = vec![0u8; k];
                for code in 0..states {
                    let mut c = code;
                    for i in (0..k).rev() {
                        assign[i] = (c % q) as u8;
                        c /= q;
                    }
                    let mut w: f64 = (0..k).map(|i| fields[i][assign[i] as usize]).product();
                    for &(i, j) in edges {
                        w *= m.alpha(assign[i], assign[j]);
                    }
                    weights.push(w);
                }
                let total: f64 = weights.iter().sum();
                if total <= 0.0 {
                    return Err(Error::FrozenSite {
                        vertex: self.vertices[0],
                    });
                }
                let target = uniforms[0] * total;
                let mut acc = 0.0;
                let mut chosen = states - 1;
                for (code, &w) in weights.iter().enumerate() {
                    acc += w;
                    if w > 0.0 && target < acc {
                        chosen = code;
                        break;
                    }
                }
                let mut c = chosen;
                for i in (0..k).rev() {
                    s[self.vertices[i]] = (c % q) as u8;
                    c /= q;
                }
                Ok(())
            }
        }
    }

    pub fn resample<R: Rng + ?Sized>(&self, m: &Model, s: &mut [u8], rng: &mut R) -> Result<()> {
        let u: Vec<f64> = (0..self.uniforms_needed()).map(|_| rng.random()).collect();
        self.resample_with(m, s, &u)
    }
}

/// Exact conditional Gibbs draw on `block` given the rest of `sigma`.
pub fn block_resample<R: Rng + ?Sized>(m: &Model, g: &Graph, sigma: &Configuration, block: &[usize], rng: &mut R) -> Result<Configuration> {
    let sampler = BlockSampler::new(m, g, block)?;
    let mut s = sigma.0.clone();
    sampler.resample(m, &mut s, rng)?;
    Ok(Configuration(s))
}

/// Discrete-time block dynamics: each step resamples a uniform block.
pub fn simulate_block_discrete<R: Rng + ?Sized>(m: &Model, g: &Graph, init: &Configuration, partition: &BlockPartition, steps: u64, rng: &mut R) -> Result<Configuration> {
    check_legal(m, g, init)?;
    let samplers = partition
        .blocks
        .iter()
        .map(|b| BlockSampler::new(m, g, b))
        .collect::<Result<Vec<_>>>()?;
    let mut s = init.0.clone();
    for _ in 0..steps {
        let k = rng.random_range(0..samplers.len());
        samplers[k].resample(m, &mut s, rng)?;
    }
    Ok(Configuration(s))
}

/// Continuous-time block dynamics: every block carries a rate-1 clock.
pub fn simulate_block_ct<R: Rng + ?Sized>(m: &Model, g: &Graph, init: &Configuration, partition: &BlockPartition, t_end: f64, rng: &mut R) -> Result<Configuration> {
    check_legal(m, g, init)?;
    let samplers = partition
        .blocks
        .iter()
        .map(|b| BlockSampler::new(m, g, b))
        .collect::<Result<Vec<_>>>()?;
    let rate = samplers.len() as f64;
    let mut s = init.0.clone();
    let mut t = 0.0;
    loop {
        t += exp1(rng) / rate;
        if t > t_end {
            break;
        }
        let k = rng.random_range(0..samplers.len());
        samplers[k].resample(m, &mut s, rng)?;
    }
    Ok(Configuration(s))
}

// ---------------------------------------------------------------------------
// Couplings
// ---------------------------------------------------------------------------

/// One ring of the coupled pair. Both chains use the same vertex and the
/// same uniform against their own CDFs; at a frozen vertex only `sigma`
/// moves. Returns the vertex that rang.
pub fn coupled_step<R: Rng + ?Sized>(m: &Model, g: &Graph, sigma: &mut [u8], eta: &mut [u8], frozen: Option<&[bool]>, rng: &mut R) -> Result<usize> {
    let v = rng.random_range(0..g.n());
    let u: f64 = rng.random();
    let mut buf = vec![0.0; m.alphabet_size()];
    coupled_update(m, g, sigma, eta, frozen, v, u, &mut buf)?;
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn coupled_update(m: &Model, g: &Graph, sigma: &mut [u8], eta: &mut [u8], frozen: Option<&[bool]>, v: usize, u: f64, buf: &mut [f64]) -> Result<()> {
    heat_bath(m, g, sigma, v, u, buf)?;
    if !frozen.is_some_and(|f| f[v]) {
        heat_bath(m, g, eta, v, u, buf)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoupledEvent {
    pub time: f64,
    pub vertex: usize,
    /// whether σ and η agreed on every neighbour of the vertex before the ring
    pub neighborhood_agreed: bool,
    pub disagree_before: bool,
    pub disagree_after: bool,
}

/// Runs the coupled pair in continuous time, logging every ring.
pub fn coupled_trajectory<R: Rng + ?Sized>(m: &Model, g: &Graph, sigma: &mut [u8], eta: &mut [u8], frozen: Option<&[bool]>, t_end: f64, rng: &mut R) -> Result<Vec<CoupledEvent>> {
    let n = g.n();
    let mut buf = vec![0.0; m.alphabet_size()];
    let mut t = 0.0;
    let mut log = Vec::new();
    loop {
        t += exp1(rng) / n as f64;
        if t > t_end {
            return Ok(log);
        }
        let v = rng.random_range(0..n);
        let u: f64 = rng.random();
        let agreed = g.neighbors(v).iter().all(|&w| sigma[w] == eta[w]);
        let before = sigma[v] != eta[v];
        coupled_update(m, g, sigma, eta, frozen, v, u, &mut buf)?;
        log.push(CoupledEvent {
            time: t,
            vertex: v,
            neighborhood_agreed: agreed,
            disagree_before: before,
            disagree_after: sigma[v] != eta[v],
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Coalescence {
    Coalesced { time: f64, rings: u64 },
    Censored { t_max: f64 },
}

impl Coalescence {
    pub fn time(&self) -> Option<f64> {
        match *self {
            Coalescence::Coalesced { time, .. } => Some(time),
            Coalescence::Censored { .. } => None,
        }
    }
}

/// Grand coupling of the all-plus and all-minus Ising chains.
pub fn coupling_time_monotone<R: Rng + ?Sized>(m: &Model, g: &Graph, t_max: f64, rng: &mut R) -> Result<Coalescence> {
    if !m.is_ising() {
        return Err(Error::param("monotone coupling is defined for the Ising model"));
    }
    let n = g.n();
    let mut top = vec![1u8; n];
    let mut bottom = vec![0u8; n];
    let mut differ = n;
    let mut buf = vec![0.0; 2];
    let mut t = 0.0;
    let mut rings = 0u64;
    loop {
        t += exp1(rng) / n as f64;
        if t > t_max {
            return Ok(Coalescence::Censored { t_max });
        }
        rings += 1;
        let v = rng.random_range(0..n);
        let u: f64 = rng.random();
        let before = top[v] != bottom[v];
        heat_bath(m, g, &mut top, v, u, &mut buf)?;
        heat_bath(m, g, &mut bottom, v, u, &mut buf)?;
        let after = top[v] != bottom[v];
        match (before, after) {
            (true, false) => differ -= 1,
            (false, true) => differ += 1,
            _ => {}
        }
        if differ == 0 {
            return Ok(Coalescence::Coalesced { time: t, rings });
        }
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// First time a disagreement started on `b` can reach `a`: t_v is the first
/// ring of v for v ∈ B, otherwise the first ring of v after min over
/// neighbours of t_w. Returns min over A.
pub fn fpp_disagreement_time<R: Rng + ?Sized>(g: &Graph, b: &[usize], a: &[usize], rng: &mut R) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("source and target sets must be nonempty"));
    }
    let n = g.n();
    if a.iter().chain(b).any(|&v| v >= n) {
        return Err(Error::param("vertex set out of range"));
    }
    let passage: Vec<f64> = (0..n).map(|_| exp1(rng)).collect();
    let mut target = vec![false; n];
    a.iter().for_each(|&v| target[v] = true);
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &v in b {
        if passage[v] < best[v] {
            best[v] = passage[v];
            heap.push(HeapItem(passage[v], v));
        }
    }
    while let Some(HeapItem(t, v)) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if target[v] {
            return Ok(t);
        }
        for &w in g.neighbors(v) {
            let cand = t + passage[w];
            if !done[w] && cand < best[w] {
                best[w] = cand;
                heap.push(HeapItem(cand, w));
            }
        }
    }
    Err(Error::param("target set unreachable from source set"))
}
