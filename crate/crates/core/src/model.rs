//! Spin systems: alphabet, symmetric edge interaction table, per-vertex field
//! weights, the Gibbs weight, the heat-bath kernel and the tree broadcast.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    Ising { beta: f64 },
    Potts { q: usize, beta: f64 },
    Coloring { q: usize },
    Custom,
}

/// Per-vertex multiplicative field weights.
#[derive(Debug, Clone, PartialEq)]
enum Field {
    None,
    PerVertex(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    kind: ModelKind,
    q: usize,
    alpha: Vec<f64>,
    field: Field,
}

/// Spin vector indexed by vertex; entries are alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(pub Vec<u8>);

impl Configuration {
    pub fn constant(n: usize, spin: u8) -> Self {
        Configuration(vec![spin; n])
    }

    pub fn spins(&self) -> &[u8] {
        &self.0
    }
}

/// Ising spin value (±1) of an alphabet index.
#[inline]
pub fn ising_value(index: u8) -> f64 {
    if index == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Alphabet index of an Ising spin value.
#[inline]
pub fn ising_index(plus: bool) -> u8 {
    u8::from(plus)
}

/// Broadcast flip probability ε = 1/(1+e^{2β}).
pub fn eps_of_beta(beta: f64) -> f64 {
    1.0 / (1.0 + (2.0 * beta).exp())
}

/// Inverse of [`eps_of_beta`]; θ = 1 − 2ε gives β = atanh θ.
pub fn beta_of_theta(theta: f64) -> f64 {
    theta.atanh()
}

impl Model {
    /// Custom model from a symmetric q×q table (row-major).
    pub fn custom(q: usize, alpha: Vec<f64>) -> Result<Self> {
        if !(2..=u8::MAX as usize).contains(&q) {
            return Err(Error::param(format!("alphabet size {q} out of range")));
        }
        if alpha.len() != q * q {
            return Err(Error::param("interaction table has wrong size"));
        }
        if alpha.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::param("interaction weights must be finite and >= 0"));
        }
        for a in 0..q {
            if alpha[a * q..(a + 1) * q].iter().all(|&x| x == 0.0) {
                return Err(Error::param(format!("row {a} of interaction table is zero")));
            }
            for b in 0..q {
                if alpha[a * q + b] != alpha[b * q + a] {
                    return Err(Error::param("interaction table must be symmetric"));
                }
            }
        }
        Ok(Model {
            kind: ModelKind::Custom,
            q,
            alpha,
            field: Field::None,
        })
    }

    /// Ferromagnetic Ising model without field: α(s,t) = e^{βst}.
    pub fn ising(beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::param(format!("beta must be finite and >= 0, got {beta}")));
        }
        let e = beta.exp();
        let mut m = Model::custom(2, vec![e, 1.0 / e, 1.0 / e, e])?;
        m.kind = ModelKind::Ising { beta };
        Ok(m)
    }

    /// Ising model with external field H(v), weight e^{H(v)s} at v.
    pub fn ising_with_field(beta: f64, field: &[f64]) -> Result<Self> {
        let m = Model::ising(beta)?;
        let weights = field
            .iter()
            .map(|&h| vec![(-h).exp(), h.exp()])
            .collect();
        m.with_field(weights)
    }

    /// Potts model: α(a,b) = e^{β 1[a=b]}.
    pub fn potts(q: usize, beta: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::param(format!("potts needs q >= 2, got {q}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::param(format!("beta must be finite and >= 0, got {beta}")));
        }
        let e = beta.exp();
        let alpha = (0..q * q)
            .map(|i| if i / q == i % q { e } else { 1.0 })
            .collect();
        let mut m = Model::custom(q, alpha)?;
        m.kind = ModelKind::Potts { q, beta };
        Ok(m)
    }

    /// Proper q-coloring: α(a,b) = 1[a≠b].
    pub fn coloring(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::param(format!("coloring needs q >= 2, got {q}")));
        }
        let alpha = (0..q * q)
            .map(|i| if i / q == i % q { 0.0 } else { 1.0 })
            .collect();
        let mut m = Model::custom(q, alpha)?;
        m.kind = ModelKind::Coloring { q };
        Ok(m)
    }

    /// Replaces the field by explicit per-vertex weight vectors.
    pub fn with_field(mut self, weights: Vec<Vec<f64>>) -> Result<Self> {
        for (v, w) in weights.iter().enumerate() {
            if w.len() != self.q {
                return Err(Error::param(format!("field at vertex {v} has wrong length")));
            }
            if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::param(format!("field at vertex {v} must be positive")));
            }
        }
        self.field = Field::PerVertex(weights);
        Ok(self)
    }

    /// Multiplies the field at `v` by the interaction row of a frozen
    /// phantom neighbour with spin `a` (a boundary condition).
    pub fn with_phantom_neighbor(self, n: usize, v: usize, a: u8) -> Result<Self> {
        if v >= n || a as usize >= self.q {
            return Err(Error::param("phantom neighbour out of range"));
        }
        let q = self.q;
        let mut weights: Vec<Vec<f64>> = (0..n)
            .map(|u| (0..q).map(|b| self.field_weight(u, b as u8)).collect())
            .collect();
        let row = &self.alpha[a as usize * q..(a as usize + 1) * q];
        if row.iter().any(|&x| x == 0.0) {
            return Err(Error::param("phantom neighbour requires a soft interaction"));
        }
        for b in 0..q {
            weights[v][b] *= row[b];
        }
        let kind = self.kind;
        let mut m = self.with_field(weights)?;
        m.kind = kind;
        Ok(m)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn alpha(&self, a: u8, b: u8) -> f64 {
        self.alpha[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn field_weight(&self, v: usize, a: u8) -> f64 {
        match &self.field {
            Field::None => 1.0,
            Field::PerVertex(w) => w.get(v).map_or(1.0, |row| row[a as usize]),
        }
    }

    pub fn has_field(&self) -> bool {
        !matches!(self.field, Field::None)
    }

    /// True iff some interaction weight is zero.
    pub fn is_hard(&self) -> bool {
        self.alpha.iter().any(|&x| x == 0.0)
    }

    pub fn beta(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Ising { beta } | ModelKind::Potts { beta, .. } => Some(beta),
            _ => None,
        }
    }

    /// Broadcast flip probability of an Ising model.
    pub fn eps(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Ising { beta } => Some(eps_of_beta(beta)),
            _ => None,
        }
    }

    pub fn theta(&self) -> Option<f64> {
        self.eps().map(|e| 1.0 - 2.0 * e)
    }

    pub fn is_ising(&self) -> bool {
        matches!(self.kind, ModelKind::Ising { .. })
    }

    fn check_config(&self, g: &Graph, spins: &[u8]) -> Result<()> {
        if spins.len() != g.n() {
            return Err(Error::param(format!(
                "configuration has {} spins, graph has {} vertices",
                spins.len(),
                g.n()
            )));
        }
        if let Some(v) = spins.iter().position(|&s| s as usize >= self.q) {
            return Err(Error::param(format!("spin at vertex {v} outside alphabet")));
        }
        Ok(())
    }

    /// Product of α over edges and field weights over vertices.
    pub fn gibbs_weight(&self, g: &Graph, sigma: &Configuration) -> Result<f64> {
        self.check_config(g, &sigma.0)?;
        Ok(self.weight_unchecked(g, &sigma.0))
    }

    pub(crate) fn weight_unchecked(&self, g: &Graph, s: &[u8]) -> f64 {
        let mut w = 1.0;
        for (u, v) in g.edges() {
            w *= self.alpha(s[u], s[v]);
        }
        for (v, &a) in s.iter().enumerate() {
            w *= self.field_weight(v, a);
        }
        w
    }

    /// Unnormalised heat-bath weights at `v` written into `out`; returns the
    /// total. Does not read `s[v]`.
    #[inline]
    pub(crate) fn local_weights(&self, g: &Graph, s: &[u8], v: usize, out: &mut [f64]) -> f64 {
        let mut total = 0.0;
        for a in 0..self.q {
            let mut w = self.field_weight(v, a as u8);
            for &u in g.neighbors(v) {
                w *= self.alpha(a as u8, s[u]);
            }
            out[a] = w;
            total += w;
        }
        total
    }

    /// Conditional law of the spin at `v` given the rest.
    pub fn heat_bath_distribution(&self, g: &Graph, sigma: &Configuration, v: usize) -> Result<Vec<f64>> {
        self.check_config(g, &sigma.0)?;
        if v >= g.n() {
            return Err(Error::param(format!("vertex {v} out of range")));
        }
        let mut p = vec![0.0; self.q];
        let total = self.local_weights(g, &sigma.0, v, &mut p);
        if total <= 0.0 {
            return Err(Error::FrozenSite { vertex: v });
        }
        p.iter_mut().for_each(|x| *x /= total);
        Ok(p)
    }

    /// Single-site ergodicity of the dynamics over legal configurations.
    pub fn is_ergodic(&self, g: &Graph, raw_limit: u64) -> Result<bool> {
        let gt = crate::exact::enumerate_gibbs(self, g, raw_limit)?;
        Ok(crate::exact::communicating_classes(&gt) == 1)
    }
}

/// Smallest index whose cumulative weight exceeds `u * total`.
#[inline]
pub(crate) fn inverse_cdf(weights: &[f64], total: f64, u: f64) -> u8 {
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (a, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = a;
            if target < acc {
                return a as u8;
            }
        }
    }
    last as u8
}

/// Ising broadcast on the BFS-labelled b-ary tree of depth r: uniform root,
/// each child copies its parent with probability 1−ε.
pub fn broadcast_sample<R: Rng + ?Sized>(b: usize, r: u32, eps: f64, rng: &mut R) -> Result<Configuration> {
    let g = crate::graph::build_bary_tree(b, r)?;
    broadcast_on_tree(&g, eps, rng)
}

/// Broadcast on any tree graph, top-down from its root.
pub fn broadcast_on_tree<R: Rng + ?Sized>(g: &Graph, eps: f64, rng: &mut R) -> Result<Configuration> {
    if !(0.0..=0.5).contains(&eps) {
        return Err(Error::param(format!("eps must lie in [0, 1/2], got {eps}")));
    }
    if !g.is_tree() {
        return Err(Error::param("broadcast requires a tree"));
    }
    let mut s = vec![0u8; g.n()];
    s[g.root()] = ising_index(rng.random::<f64>() < 0.5);
    let mut stack = vec![g.root()];
    while let Some(v) = stack.pop() {
        for c in g.children(v) {
            let flip = rng.random::<f64>() < eps;
            s[c] = if flip { 1 - s[v] } else { s[v] };
            stack.push(c);
        }
    }
    Ok(Configuration(s))
}
