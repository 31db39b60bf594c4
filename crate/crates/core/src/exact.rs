//! Brute-force oracle: legal configurations and their probabilities, the
//! continuous-time generator, spectral gaps, Dirichlet forms, covariances and
//! mutual information.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lanczos;
use crate::model::Model;

/// Default cap on |A|^n raw configurations.
pub const DEFAULT_RAW_LIMIT: u64 = 1 << 22;
/// Largest state space handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 4096;
/// Largest state space handled at all by the spectral routines.
pub const ITERATIVE_LIMIT: usize = 1 << 17;
/// Required eigenpair residual.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Legal configurations in lexicographic order (vertex 0 most significant)
/// with their Gibbs probabilities.
#[derive(Debug, Clone)]
pub struct GibbsTable {
    n: usize,
    q: usize,
    spins: Vec<u8>,
    codes: Vec<u64>,
    probs: Vec<f64>,
    z: f64,
}

impl GibbsTable {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    pub fn config(&self, i: usize) -> &[u8] {
        &self.spins[i * self.n..(i + 1) * self.n]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Partition function.
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn code(&self, spins: &[u8]) -> u64 {
        spins
            .iter()
            .fold(0u64, |acc, &s| acc * self.q as u64 + s as u64)
    }

    pub fn index_of(&self, spins: &[u8]) -> Option<usize> {
        if spins.len() != self.n || spins.iter().any(|&s| s as usize >= self.q) {
            return None;
        }
        self.codes.binary_search(&self.code(spins)).ok()
    }

    /// Index of the configuration obtained from state `i` by setting
    /// vertex `v` to `a`, if legal.
    pub fn neighbor_index(&self, i: usize, v: usize, a: u8) -> Option<usize> {
        let cur = self.config(i)[v] as i64;
        let place = (self.q as u64).pow((self.n - 1 - v) as u32) as i64;
        let code = self.codes[i] as i64 + (a as i64 - cur) * place;
        self.codes.binary_search(&(code as u64)).ok()
    }

    /// Evaluates `f` on every configuration.
    pub fn tabulate<F: Fn(&[u8]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.config(i))).collect()
    }

    pub fn expect(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, x)| p * x).sum()
    }
}

impl Serialize for GibbsTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Configs<'a>(&'a GibbsTable);
        impl Serialize for Configs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_seq((0..self.0.len()).map(|i| self.0.config(i)))
            }
        }
        let mut st = serializer.serialize_struct("GibbsTable", 5)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("alphabet_size", &self.q)?;
        st.serialize_field("z", &self.z)?;
        st.serialize_field("configs", &Configs(self))?;
        st.serialize_field("probs", &self.probs)?;
        st.end()
    }
}

/// Enumerates legal configurations by backtracking in lexicographic order.
pub fn enumerate_gibbs(m: &Model, g: &Graph, raw_limit: u64) -> Result<GibbsTable> {
    let n = g.n();
    let q = m.alphabet_size();
    let raw = (q as u64).checked_pow(n as u32);
    match raw {
        Some(r) if r <= raw_limit => {}
        _ => {
            return Err(Error::Size {
                what: "raw configuration count",
                actual: (q as u128).saturating_pow(n as u32),
                limit: raw_limit as u128,
            })
        }
    }
    let earlier: Vec<Vec<usize>> = (0..n)
        .map(|v| g.neighbors(v).iter().copied().filter(|&w| w < v).collect())
        .collect();
    let mut spins = Vec::new();
    let mut codes = Vec::new();
    let mut weights = Vec::new();
    let mut cur = vec![0u8; n];
    let mut partial = vec![1.0f64; n + 1];
    let mut code = vec![0u64; n + 1];
    // iterative depth-first search; `next[v]` is the next spin to try at v
    let mut next = vec![0usize; n];
    let mut v = 0usize;
    loop {
        if v == n {
            spins.extend_from_slice(&cur);
            codes.push(code[n]);
            weights.push(partial[n]);
            v -= 1;
            continue;
        }
        if next[v] == q {
            next[v] = 0;
            if v == 0 {
                break;
            }
            v -= 1;
            continue;
        }
        let a = next[v] as u8;
        next[v] += 1;
        let mut w = partial[v] * m.field_weight(v, a);
        for &u in &earlier[v] {
            w *= m.alpha(a, cur[u]);
        }
        if w > 0.0 {
            cur[v] = a;
            partial[v + 1] = w;
            code[v + 1] = code[v] * q as u64 + a as u64;
            v += 1;
        }
    }
    if weights.is_empty() {
        return Err(Error::EmptyStateSpace);
    }
    let z: f64 = weights.iter().sum();
    if !z.is_finite() {
        return Err(Error::Numeric {
            message: "partition function overflowed".into(),
            residual: f64::INFINITY,
        });
    }
    let probs = weights.iter().map(|w| w / z).collect();
    Ok(GibbsTable {
        n,
        q,
        spins,
        codes,
        probs,
        z,
    })
}

/// Number of classes of legal configurations connected by single-site moves.
pub fn communicating_classes(gt: &GibbsTable) -> usize {
    let len = gt.len();
    let mut parent: Vec<usize> = (0..len).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut classes = len;
    for i in 0..len {
        for v in 0..gt.n {
            let cur = gt.config(i)[v];
            for a in 0..gt.q as u8 {
                if a == cur {
                    continue;
                }
                if let Some(j) = gt.neighbor_index(i, v, a) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                        classes -= 1;
                    }
                }
            }
        }
    }
    classes
}

/// Sparse generator of the heat-bath dynamics (rate-1 clock per vertex).
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    n_sites: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    rates: Vec<f64>,
    diag: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Off-diagonal entries `(j, q(i→j))` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.rates[r])
            .map(|(&j, &q)| (j as usize, q))
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    pub fn nnz_offdiag(&self) -> usize {
        self.rates.len()
    }

    /// Rate q(i→j), zero when absent.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.rates[r.start + k],
            Err(_) if i == j => self.diag[i],
            Err(_) => 0.0,
        }
    }

    /// Position of entry (i, j) in the off-diagonal storage.
    pub(crate) fn entry_position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .binary_search(&(j as u32))
            .ok()
            .map(|k| r.start + k)
    }

    /// Largest |μ(i)q(i→j) − μ(j)q(j→i)|.
    pub fn reversibility_error(&self, gt: &GibbsTable) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for (j, q) in self.row(i) {
                let back = self.rate(j, i);
                worst = worst.max((gt.prob(i) * q - gt.prob(j) * back).abs());
            }
        }
        worst
    }

    /// L∞ norm of μ𝓛.
    pub fn stationarity_error(&self, gt: &GibbsTable) -> f64 {
        let mut flow = vec![0.0; self.dim()];
        for i in 0..self.dim() {
            flow[i] += gt.prob(i) * self.diag[i];
            for (j, q) in self.row(i) {
                flow[j] += gt.prob(i) * q;
            }
        }
        flow.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    /// Largest |row sum|.
    pub fn row_sum_error(&self) -> f64 {
        (0..self.dim())
            .map(|i| (self.diag[i] + self.row(i).map(|(_, q)| q).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }
}

/// Assembles q(σ→σ_v^a) = K[σ→σ_v^a] for every legal single-site move.
pub fn build_generator(m: &Model, g: &Graph, gt: &GibbsTable) -> Result<GeneratorMatrix> {
    if gt.n != g.n() || gt.q != m.alphabet_size() {
        return Err(Error::param("gibbs table does not match model and graph"));
    }
    let classes = communicating_classes(gt);
    if classes != 1 {
        return Err(Error::NonErgodic {
            components: classes,
        });
    }
    let q = gt.q;
    let rows: Vec<Vec<(u32, f64)>> = (0..gt.len())
        .into_par_iter()
        .map(|i| {
            let s = gt.config(i);
            let mut buf = vec![0.0; q];
            let mut row = Vec::new();
            for v in 0..gt.n {
                let total = m.local_weights(g, s, v, &mut buf);
                for a in 0..q as u8 {
                    if a == s[v] || buf[a as usize] == 0.0 {
                        continue;
                    }
                    let j = gt
                        .neighbor_index(i, v, a)
                        .expect("positive kernel weight implies a legal target");
                    row.push((j as u32, buf[a as usize] / total));
                }
            }
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    let mut cols = Vec::new();
    let mut rates = Vec::new();
    let mut diag = Vec::with_capacity(rows.len());
    row_ptr.push(0);
    for row in rows {
        let out: f64 = row.iter().map(|e| e.1).sum();
        diag.push(-out);
        for (j, r) in row {
            cols.push(j);
            rates.push(r);
        }
        row_ptr.push(cols.len());
    }
    Ok(GeneratorMatrix {
        n_sites: gt.n,
        row_ptr,
        cols,
        rates,
        diag,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub lambda2: f64,
    pub tau2: f64,
    pub residual: f64,
    pub method: String,
    pub dim: usize,
    /// Eigenfunction for `lambda2` as a function on configurations
    /// (normalised to unit μ-norm).
    #[serde(skip)]
    pub eigenfunction: Vec<f64>,
}

/// −S with S = D^{1/2} 𝓛 D^{−1/2}, scaled by `scale`.
struct SymmetricOperator {
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SymmetricOperator {
    fn new(gen: &GeneratorMatrix, gt: &GibbsTable, scale: f64) -> Self {
        let sq: Vec<f64> = gt.probs.iter().map(|p| p.sqrt()).collect();
        let mut vals = Vec::with_capacity(gen.rates.len());
        for i in 0..gen.dim() {
            for k in gen.row_ptr[i]..gen.row_ptr[i + 1] {
                let j = gen.cols[k] as usize;
                vals.push(-scale * gen.rates[k] * sq[i] / sq[j]);
            }
        }
        SymmetricOperator {
            diag: gen.diag.iter().map(|d| -scale * d).collect(),
            row_ptr: gen.row_ptr.clone(),
            cols: gen.cols.clone(),
            vals,
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = self.diag[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = s;
        });
    }

    fn dense(&self) -> DMatrix<f64> {
        let d = self.diag.len();
        let mut a = DMatrix::zeros(d, d);
        for i in 0..d {
            a[(i, i)] = self.diag[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                a[(i, self.cols[k] as usize)] = self.vals[k];
            }
        }
        a
    }

    fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.diag.len() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k] as usize;
                let r = self.row_ptr[j]..self.row_ptr[j + 1];
                let back = match self.cols[r.clone()].binary_search(&(i as u32)) {
                    Ok(p) => self.vals[r.start + p],
                    Err(_) => 0.0,
                };
                worst = worst.max((self.vals[k] - back).abs());
            }
        }
        worst
    }
}

/// Second-smallest eigenpair of the (scaled) symmetrised negative generator.
fn second_eigenpair(gen: &GeneratorMatrix, gt: &GibbsTable, scale: f64) -> Result<(f64, Vec<f64>, f64, &'static str)> {
    let dim = gen.dim();
    if dim != gt.len() {
        return Err(Error::param("generator and table dimensions differ"));
    }
    if dim < 2 {
        return Err(Error::param("spectral gap needs at least two states"));
    }
    if dim > ITERATIVE_LIMIT {
        return Err(Error::Size {
            what: "state space for spectral gap",
            actual: dim as u128,
            limit: ITERATIVE_LIMIT as u128,
        });
    }
    let op = SymmetricOperator::new(gen, gt, scale);
    let null: Vec<f64> = gt.probs.iter().map(|p| p.sqrt()).collect();
    if dim <= DENSE_LIMIT {
        let a = op.dense();
        let eig = SymmetricEigen::new(a.clone());
        let mut idx: Vec<usize> = (0..dim).collect();
        idx.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let k = idx[1];
        let value = eig.eigenvalues[k];
        let mut x: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let pivot = x
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(1.0);
        if pivot < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let xv = DVector::from_column_slice(&x);
        let residual = (&a * &xv - &xv * value).norm();
        if residual > RESIDUAL_TOL {
            return Err(Error::Numeric {
                message: "dense eigensolver residual above tolerance".into(),
                residual,
            });
        }
        return Ok((value, x, residual, "dense"));
    }
    let pair = lanczos::smallest_excluding(|x, y| op.apply(x, y), &null, &lanczos::Options::default())?;
    Ok((pair.value, pair.vector, pair.residual, "lanczos"))
}

/// Spectral gap λ2 of −𝓛 and τ2 = 1/λ2.
pub fn spectral_gap(gen: &GeneratorMatrix, gt: &GibbsTable) -> Result<SpectralReport> {
    let (lambda2, x, residual, method) = second_eigenpair(gen, gt, 1.0)?;
    let eigenfunction = x
        .iter()
        .zip(&gt.probs)
        .map(|(xi, p)| xi / p.sqrt())
        .collect();
    Ok(SpectralReport {
        lambda2,
        tau2: 1.0 / lambda2,
        residual,
        method: method.to_string(),
        dim: gen.dim(),
        eigenfunction,
    })
}

/// Spectral gap 1 − λ_2(M) of the discrete chain M = I + 𝓛/n, computed by
/// its own eigensolve.
pub fn discrete_spectral_gap(gen: &GeneratorMatrix, gt: &GibbsTable) -> Result<f64> {
    let n = gen.n_sites as f64;
    let dim = gen.dim();
    if dim <= DENSE_LIMIT {
        let op = SymmetricOperator::new(gen, gt, 1.0);
        let mut mm = DMatrix::<f64>::identity(dim, dim);
        mm -= op.dense() / n;
        let eig = SymmetricEigen::new(mm);
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        return Ok(1.0 - vals[1]);
    }
    let (value, ..) = second_eigenpair(gen, gt, 1.0 / n)?;
    Ok(value)
}

/// Max |S − Sᵀ| of the symmetrised generator.
pub fn symmetrization_error(gen: &GeneratorMatrix, gt: &GibbsTable) -> f64 {
    SymmetricOperator::new(gen, gt, 1.0).max_asymmetry()
}

/// All eigenvalues of −𝓛 (dense instances only), ascending.
pub fn full_spectrum(gen: &GeneratorMatrix, gt: &GibbsTable) -> Result<Vec<f64>> {
    if gen.dim() > DENSE_LIMIT {
        return Err(Error::Size {
            what: "state space for full spectrum",
            actual: gen.dim() as u128,
            limit: DENSE_LIMIT as u128,
        });
    }
    let eig = SymmetricEigen::new(SymmetricOperator::new(gen, gt, 1.0).dense());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Stationary law of 𝓛 solved from πᵀ𝓛 = 0, Σπ = 1 without using μ.
pub fn stationary_distribution(gen: &GeneratorMatrix) -> Result<Vec<f64>> {
    let dim = gen.dim();
    if dim > DENSE_LIMIT {
        return Err(Error::Size {
            what: "state space for stationary solve",
            actual: dim as u128,
            limit: DENSE_LIMIT as u128,
        });
    }
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        a[(i, i)] = gen.diag[i];
        for (j, q) in gen.row(i) {
            a[(j, i)] = q;
        }
    }
    for j in 0..dim {
        a[(dim - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(dim);
    rhs[dim - 1] = 1.0;
    let sol = a.lu().solve(&rhs).ok_or_else(|| Error::Numeric {
        message: "singular system for stationary law".into(),
        residual: f64::NAN,
    })?;
    Ok(sol.iter().copied().collect())
}

/// Everything the exact oracle knows about one instance.
#[derive(Debug, Clone)]
pub struct ExactAnalysis {
    pub table: GibbsTable,
    pub generator: GeneratorMatrix,
    pub report: SpectralReport,
}

pub fn exact_analysis(m: &Model, g: &Graph, raw_limit: u64) -> Result<ExactAnalysis> {
    let table = enumerate_gibbs(m, g, raw_limit)?;
    let generator = build_generator(m, g, &table)?;
    let report = spectral_gap(&generator, &table)?;
    Ok(ExactAnalysis {
        table,
        generator,
        report,
    })
}

/// Gap of the tree dynamics when the root has a frozen phantom parent with
/// spin `a`.
pub fn conditioned_spectral_gap(m: &Model, g: &Graph, a: u8, raw_limit: u64) -> Result<SpectralReport> {
    let mc = m.clone().with_phantom_neighbor(g.n(), g.root(), a)?;
    Ok(exact_analysis(&mc, g, raw_limit)?.report)
}

/// Mixing-time interval [τ2, τ2(1 + ln(1/min μ))].
pub fn mixing_time_bounds(report: &SpectralReport, gt: &GibbsTable) -> (f64, f64) {
    let lo = report.tau2;
    (lo, lo * (1.0 + (1.0 / gt.min_prob()).ln()))
}

/// E[f,f] = ½ Σ μ(σ) q(σ→τ) (f(σ) − f(τ))².
pub fn dirichlet_form(gen: &GeneratorMatrix, gt: &GibbsTable, f: &[f64]) -> Result<f64> {
    if f.len() != gt.len() {
        return Err(Error::param("test function length differs from state count"));
    }
    let total: f64 = (0..gen.dim())
        .map(|i| {
            gen.row(i)
                .map(|(j, q)| q * (f[i] - f[j]).powi(2))
                .sum::<f64>()
                * gt.prob(i)
        })
        .sum();
    Ok(0.5 * total)
}

pub fn exact_covariance(gt: &GibbsTable, f: &[f64], g: &[f64]) -> Result<f64> {
    if f.len() != gt.len() || g.len() != gt.len() {
        return Err(Error::param("function length differs from state count"));
    }
    let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    Ok(gt.expect(&fg) - gt.expect(f) * gt.expect(g))
}

/// Joint law of (σ_A, σ_B) as a row-major |A-codes| × |B-codes| table.
#[derive(Debug, Clone)]
pub struct JointTable {
    pub rows: usize,
    pub cols: usize,
    pub p: Vec<f64>,
}

pub const JOINT_LIMIT: u128 = 1 << 22;

pub fn joint_distribution(gt: &GibbsTable, a: &[usize], b: &[usize]) -> Result<JointTable> {
    let q = gt.q as u128;
    let rows = q.checked_pow(a.len() as u32).unwrap_or(u128::MAX);
    let cols = q.checked_pow(b.len() as u32).unwrap_or(u128::MAX);
    let cells = rows.saturating_mul(cols);
    if cells > JOINT_LIMIT {
        return Err(Error::Size {
            what: "joint marginal table",
            actual: cells,
            limit: JOINT_LIMIT,
        });
    }
    if a.iter().chain(b).any(|&v| v >= gt.n) {
        return Err(Error::param("vertex set out of range"));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let mut p = vec![0.0; rows * cols];
    let code = |s: &[u8], set: &[usize]| set.iter().fold(0usize, |acc, &v| acc * gt.q + s[v] as usize);
    for i in 0..gt.len() {
        let s = gt.config(i);
        p[code(s, a) * cols + code(s, b)] += gt.prob(i);
    }
    Ok(JointTable { rows, cols, p })
}

impl JointTable {
    pub fn row_marginal(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.p[r * self.cols..(r + 1) * self.cols].iter().sum())
            .collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.p[r * self.cols + c]).sum())
            .collect()
    }

    /// Mutual information in nats; empty cells contribute 0.
    pub fn mutual_information(&self) -> f64 {
        let pr = self.row_marginal();
        let pc = self.col_marginal();
        let mut mi = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let x = self.p[r * self.cols + c];
                if x > 0.0 {
                    mi += x * (x / (pr[r] * pc[c])).ln();
                }
            }
        }
        mi.max(0.0)
    }

    pub fn transpose(&self) -> JointTable {
        let mut p = vec![0.0; self.p.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                p[c * self.rows + r] = self.p[r * self.cols + c];
            }
        }
        JointTable {
            rows: self.cols,
            cols: self.rows,
            p,
        }
    }
}

pub fn exact_mutual_information(gt: &GibbsTable, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(joint_distribution(gt, a, b)?.mutual_information())
}
