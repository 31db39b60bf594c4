//! Linear arrangements and cut-width: prefix cut profiles, exact cut-width
//! by dynamic programming over vertex subsets, depth-first tree orderings,
//! the counterclockwise shortest-path-tree ordering of embedded balls, and
//! the relaxation-time upper bounds that consume a cut-width.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest graph accepted by [`exact_cutwidth`].
pub const EXACT_CUTWIDTH_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearOrdering {
    pub order: Vec<usize>,
    /// `cut_profile[k]` = number of edges between the first k vertices and
    /// the rest, for k = 0..=n.
    pub cut_profile: Vec<usize>,
    pub width: usize,
}

impl LinearOrdering {
    /// `(k, cut_k)` rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,cut\n");
        for (k, c) in self.cut_profile.iter().enumerate() {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }
}

pub fn cutwidth_of_ordering(g: &Graph, order: &[usize]) -> Result<LinearOrdering> {
    let n = g.n();
    if order.len() != n {
        return Err(Error::param("ordering length differs from vertex count"));
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(Error::param("ordering is not a permutation"));
        }
        pos[v] = i;
    }
    let mut profile = Vec::with_capacity(n + 1);
    let mut cut: i64 = 0;
    profile.push(0);
    for (i, &v) in order.iter().enumerate() {
        for &w in g.neighbors(v) {
            if pos[w] < i {
                cut -= 1;
            } else {
                cut += 1;
            }
        }
        profile.push(cut as usize);
    }
    let width = profile.iter().copied().max().unwrap_or(0);
    Ok(LinearOrdering {
        order: order.to_vec(),
        cut_profile: profile,
        width,
    })
}

/// Exact cut-width with an optimal ordering. `dp[S]` is the least possible
/// maximum prefix cut over orderings that place S first.
pub fn exact_cutwidth(g: &Graph) -> Result<LinearOrdering> {
    let n = g.n();
    if n > EXACT_CUTWIDTH_LIMIT {
        return Err(Error::Size {
            what: "vertex count for exact cut-width",
            actual: n as u128,
            limit: EXACT_CUTWIDTH_LIMIT as u128,
        });
    }
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | (1 << w)))
        .collect();
    let full = 1usize << n;
    let mut cut = vec![0u16; full];
    let mut dp = vec![u16::MAX; full];
    let mut last = vec![0u8; full];
    dp[0] = 0;
    for set in 1..full {
        let low = set.trailing_zeros() as usize;
        let rest = set & !(1 << low);
        let inside = (nbr[low] & rest as u32).count_ones() as u16;
        cut[set] = cut[rest] + g.neighbors(low).len() as u16 - 2 * inside;
        let mut best = u16::MAX;
        let mut arg = 0u8;
        let mut bits = set;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let cand = dp[set & !(1 << v)];
            if cand < best {
                best = cand;
                arg = v as u8;
            }
        }
        dp[set] = best.max(cut[set]);
        last[set] = arg;
    }
    let mut order = Vec::with_capacity(n);
    let mut set = full - 1;
    while set != 0 {
        let v = last[set] as usize;
        order.push(v);
        set &= !(1 << v);
    }
    order.reverse();
    let ordering = cutwidth_of_ordering(g, &order)?;
    debug_assert_eq!(ordering.width, dp[full - 1] as usize);
    Ok(ordering)
}

fn preorder(g: &Graph, root: usize, children: impl Fn(usize) -> Vec<usize>) -> Vec<usize> {
    let mut order = Vec::with_capacity(g.n());
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        order.push(v);
        let kids = children(v);
        stack.extend(kids.into_iter().rev());
    }
    order
}

/// Left-to-right depth-first (preorder) ordering of a tree.
pub fn dfs_tree_ordering(g: &Graph) -> Result<LinearOrdering> {
    if !g.is_tree() {
        return Err(Error::param("dfs tree ordering requires a tree"));
    }
    let order = preorder(g, g.root(), |v| g.children(v));
    cutwidth_of_ordering(g, &order)
}

/// In-order arrangement of a tree: the first child's subtree, then the
/// vertex, then the remaining children's subtrees.
pub fn inorder_tree_ordering(g: &Graph) -> Result<LinearOrdering> {
    if !g.is_tree() {
        return Err(Error::param("in-order arrangement requires a tree"));
    }
    fn visit(g: &Graph, v: usize, out: &mut Vec<usize>) {
        let kids = g.children(v);
        match kids.split_first() {
            None => out.push(v),
            Some((first, rest)) => {
                visit(g, *first, out);
                out.push(v);
                for &c in rest {
                    visit(g, c, out);
                }
            }
        }
    }
    let mut order = Vec::with_capacity(g.n());
    visit(g, g.root(), &mut order);
    cutwidth_of_ordering(g, &order)
}

/// Depth-first order of the breadth-first shortest-path tree from the root
/// (each vertex hangs from its first discoverer), children taken
/// counterclockwise starting just after the parent in the rotation.
pub fn hyperbolic_ordering(g: &Graph) -> Result<LinearOrdering> {
    if !g.has_rotation() {
        return Err(Error::param("hyperbolic ordering needs a rotation system"));
    }
    let n = g.n();
    let root = g.root();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in g.rotation(v).unwrap() {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    let children = |v: usize| -> Vec<usize> {
        let rot = g.rotation(v).unwrap();
        let start = if v == root {
            0
        } else {
            rot.iter().position(|&w| w == parent[v]).unwrap() + 1
        };
        (0..rot.len())
            .map(|k| rot[(start + k) % rot.len()])
            .filter(|&w| w != root && parent[w] == v)
            .collect()
    };
    let order = preorder(g, root, children);
    cutwidth_of_ordering(g, &order)
}

/// Canonical-path upper bound n·e^{(4ξ+2Δ)β} on τ2 for the Ising model.
pub fn tau2_upper_bound_ising(n: usize, xi: usize, delta: usize, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::param("beta must be >= 0"));
    }
    Ok(n as f64 * ((4 * xi + 2 * delta) as f64 * beta).exp())
}

/// Canonical-path upper bound (Δ+1)·n·(q−1)^{ξ+1} on τ2 for q-colorings,
/// valid when q ≥ Δ+2.
pub fn tau2_upper_bound_coloring(n: usize, xi: usize, delta: usize, q: usize) -> Result<f64> {
    if q < delta + 2 {
        return Err(Error::param(format!(
            "coloring bound needs q >= delta + 2 (q = {q}, delta = {delta})"
        )));
    }
    Ok((delta + 1) as f64 * n as f64 * ((q - 1) as f64).powi(xi as i32 + 1))
}
