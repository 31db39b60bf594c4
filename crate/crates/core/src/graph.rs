//! Finite rooted graphs: b-ary trees, trees with horizontal level paths,
//! balls of hyperbolic {p,q} tilings, induced balls, and the `GLGRAPH`
//! text format.
//!
//! Vertex labels follow construction order, which for every builder here is
//! breadth-first from the root. When a rotation system is present the
//! adjacency list of each vertex *is* its counterclockwise neighbour order.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Hard cap on vertex counts produced by the builders.
pub const MAX_VERTICES: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    root: usize,
    level: Vec<u32>,
    has_rotation: bool,
}

impl Graph {
    /// Builds a graph from adjacency lists and computes levels by BFS from
    /// `root`. Adjacency order is kept verbatim (it doubles as the rotation
    /// system when `rotation` is true).
    pub fn from_adjacency(adj: Vec<Vec<usize>>, root: usize, rotation: bool) -> Result<Self> {
        let n = adj.len();
        if n == 0 {
            return Err(Error::param("graph must have at least one vertex"));
        }
        if root >= n {
            return Err(Error::param(format!("root {root} out of range")));
        }
        for (v, nbrs) in adj.iter().enumerate() {
            let mut seen = nbrs.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("parallel edge at vertex {v}")));
            }
            for &w in nbrs {
                if w >= n {
                    return Err(Error::param(format!("neighbour {w} of {v} out of range")));
                }
                if w == v {
                    return Err(Error::param(format!("self-loop at vertex {v}")));
                }
                if !adj[w].contains(&v) {
                    return Err(Error::param(format!("edge {v}-{w} is not symmetric")));
                }
            }
        }
        let dist = bfs_distances(&adj, root);
        if dist.iter().any(|d| d.is_none()) {
            return Err(Error::param("graph is not connected"));
        }
        let level = dist.into_iter().map(|d| d.unwrap()).collect();
        Ok(Graph {
            adj,
            root,
            level,
            has_rotation: rotation,
        })
    }

    /// Undirected graph from an edge list; neighbour order follows the list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], root: usize) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param(format!("edge {u}-{v} out of range")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Graph::from_adjacency(adj, root, false)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub fn level(&self, v: usize) -> u32 {
        self.level[v]
    }

    pub fn levels(&self) -> &[u32] {
        &self.level
    }

    /// Largest level; the radius of a ball built by radius.
    pub fn radius(&self) -> u32 {
        self.level.iter().copied().max().unwrap_or(0)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.level[v] == self.radius()
    }

    /// Vertices at exactly distance `r` from the root, in label order.
    pub fn sphere(&self, r: u32) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.level[v] == r).collect()
    }

    /// Counterclockwise neighbour order, when the graph carries an embedding.
    pub fn rotation(&self, v: usize) -> Option<&[usize]> {
        self.has_rotation.then(|| self.adj[v].as_slice())
    }

    pub fn has_rotation(&self) -> bool {
        self.has_rotation
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, ordered by `u` then adjacency order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count() + 1 == self.n()
    }

    /// BFS distances from `source`; the graph is connected by construction.
    pub fn distances_from(&self, source: usize) -> Vec<u32> {
        bfs_distances(&self.adj, source)
            .into_iter()
            .map(|d| d.expect("connected"))
            .collect()
    }

    /// Graph distance between two vertex sets.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> Option<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        let mut queue = VecDeque::new();
        for &v in a {
            if dist[v] != 0 {
                dist[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        b.iter().map(|&v| dist[v]).filter(|&d| d != u32::MAX).min()
    }

    /// Tree parent (unique neighbour one level up). Only meaningful on trees
    /// and on level-augmented trees.
    pub fn parent(&self, v: usize) -> Option<usize> {
        if v == self.root {
            return None;
        }
        self.adj[v]
            .iter()
            .copied()
            .find(|&w| self.level[w] + 1 == self.level[v])
    }

    /// Neighbours one level down, in adjacency (left-to-right) order.
    pub fn children(&self, v: usize) -> Vec<usize> {
        self.adj[v]
            .iter()
            .copied()
            .filter(|&w| self.level[w] == self.level[v] + 1)
            .collect()
    }

    /// Recognises a complete b-ary tree and returns `(b, depth)`.
    pub fn bary_shape(&self) -> Option<(usize, u32)> {
        if !self.is_tree() {
            return None;
        }
        let r = self.radius();
        if self.n() == 1 {
            return None;
        }
        let b = self.adj[self.root].len();
        for v in 0..self.n() {
            let expected = if self.level[v] == r { 0 } else { b };
            if self.children(v).len() != expected {
                return None;
            }
        }
        Some((b, r))
    }

    /// Vertices of the subtree rooted at `v` down to `depth` further levels,
    /// in BFS order. Tree graphs only.
    pub fn subtree(&self, v: usize, depth: u32) -> Vec<usize> {
        let mut out = vec![v];
        let mut frontier = vec![v];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &u in &frontier {
                next.extend(self.children(u));
            }
            if next.is_empty() {
                break;
            }
            out.extend_from_slice(&next);
            frontier = next;
        }
        out
    }

    /// Writes the `GLGRAPH 1` text form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("GLGRAPH 1\n");
        let _ = write!(s, "n {} root {}", self.n(), self.root);
        if self.has_rotation {
            s.push_str(" rotation");
        }
        s.push('\n');
        for v in 0..self.n() {
            let nbrs: Vec<String> = self.adj[v].iter().map(|w| w.to_string()).collect();
            let _ = writeln!(s, "v {} level {} nbrs {}", v, self.level[v], nbrs.join(","));
        }
        s
    }

    /// Parses the `GLGRAPH 1` text form. Stored levels must agree with BFS
    /// distances from the declared root.
    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "GLGRAPH 1")) => {}
            Some((i, other)) => {
                return Err(perr(i + 1, format!("expected `GLGRAPH 1`, got `{other}`")))
            }
            None => return Err(perr(1, "empty input".into())),
        }
        let (i, header) = lines
            .next()
            .ok_or_else(|| perr(2, "missing size line".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let rotation = match toks.as_slice() {
            ["n", _, "root", _] => false,
            ["n", _, "root", _, "rotation"] => true,
            _ => return Err(perr(i + 1, format!("malformed size line `{header}`"))),
        };
        let n: usize = toks[1]
            .parse()
            .map_err(|e| perr(i + 1, format!("bad vertex count: {e}")))?;
        let root: usize = toks[3]
            .parse()
            .map_err(|e| perr(i + 1, format!("bad root: {e}")))?;
        if n == 0 || n > MAX_VERTICES {
            return Err(perr(i + 1, format!("vertex count {n} out of range")));
        }
        let mut adj = Vec::with_capacity(n);
        let mut levels = Vec::with_capacity(n);
        for expected in 0..n {
            let (i, line) = lines
                .next()
                .ok_or_else(|| perr(expected + 3, "missing vertex line".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let (id, lvl, list) = match toks.as_slice() {
                ["v", id, "level", l, "nbrs"] => (*id, *l, ""),
                ["v", id, "level", l, "nbrs", list] => (*id, *l, *list),
                _ => return Err(perr(i + 1, format!("malformed vertex line `{line}`"))),
            };
            let id: usize = id
                .parse()
                .map_err(|e| perr(i + 1, format!("bad vertex id: {e}")))?;
            if id != expected {
                return Err(perr(i + 1, format!("expected vertex {expected}, got {id}")));
            }
            let lvl: u32 = lvl
                .parse()
                .map_err(|e| perr(i + 1, format!("bad level: {e}")))?;
            let nbrs = if list.is_empty() {
                Vec::new()
            } else {
                list.split(',')
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| perr(i + 1, format!("bad neighbour list: {e}")))?
            };
            adj.push(nbrs);
            levels.push(lvl);
        }
        if let Some((i, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(perr(i + 1, format!("trailing content `{extra}`")));
        }
        let g = Graph::from_adjacency(adj, root, rotation).map_err(|e| perr(0, e.to_string()))?;
        if let Some(v) = (0..n).find(|&v| g.level[v] != levels[v]) {
            return Err(perr(
                v + 3,
                format!(
                    "stored level {} of vertex {v} disagrees with BFS distance {}",
                    levels[v], g.level[v]
                ),
            ));
        }
        Ok(g)
    }
}

fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn tree_size(b: usize, r: u32) -> Result<usize> {
    let size_err = || Error::Size {
        what: "tree vertex count",
        actual: u128::MAX,
        limit: MAX_VERTICES as u128,
    };
    let mut total: usize = 0;
    let mut layer: usize = 1;
    for _ in 0..=r {
        total = total.checked_add(layer).ok_or_else(size_err)?;
        if total > MAX_VERTICES {
            return Err(Error::Size {
                what: "tree vertex count",
                actual: total as u128,
                limit: MAX_VERTICES as u128,
            });
        }
        layer = layer.checked_mul(b).ok_or_else(size_err)?;
    }
    Ok(total)
}

/// The r-level b-ary tree with BFS labels: children of `v` are
/// `b*v+1 ..= b*v+b`. Rotation lists the parent first, then children
/// left to right.
pub fn build_bary_tree(b: usize, r: u32) -> Result<Graph> {
    if b < 2 {
        return Err(Error::param(format!("branching must be >= 2, got {b}")));
    }
    let n = tree_size(b, r)?;
    let internal = n - b.pow(r);
    let mut adj = vec![Vec::new(); n];
    for (v, nbrs) in adj.iter_mut().enumerate() {
        if v > 0 {
            nbrs.push((v - 1) / b);
        }
        if v < internal {
            nbrs.extend((1..=b).map(|i| b * v + i));
        }
    }
    let level = (0..n)
        .map(|v| {
            let mut l = 0;
            let mut u = v;
            while u > 0 {
                u = (u - 1) / b;
                l += 1;
            }
            l
        })
        .collect();
    Ok(Graph {
        adj,
        root: 0,
        level,
        has_rotation: true,
    })
}

/// b-ary tree plus a left-to-right path through every level `>= 1`.
/// Counterclockwise rotation: parent, left neighbour, children, right
/// neighbour.
pub fn build_augmented_tree(b: usize, r: u32) -> Result<Graph> {
    if r < 1 {
        return Err(Error::param("augmented tree needs r >= 1"));
    }
    let tree = build_bary_tree(b, r)?;
    let n = tree.n();
    let mut adj = vec![Vec::new(); n];
    for (v, nbrs) in adj.iter_mut().enumerate() {
        let l = tree.level[v];
        let parent = tree.parent(v);
        let left = (v > 0 && tree.level[v - 1] == l).then(|| v - 1);
        let right = (v + 1 < n && tree.level[v + 1] == l).then_some(v + 1);
        nbrs.extend(parent);
        nbrs.extend(left);
        nbrs.extend(tree.children(v));
        nbrs.extend(right);
    }
    Ok(Graph {
        adj,
        root: 0,
        level: tree.level,
        has_rotation: true,
    })
}

/// Induced ball of `radius` around `center`. Surviving vertices keep their
/// relative label order; levels are recomputed from the new root.
pub fn ball(g: &Graph, center: usize, radius: u32) -> Result<Graph> {
    if center >= g.n() {
        return Err(Error::param(format!("center {center} out of range")));
    }
    let dist = g.distances_from(center);
    let keep: Vec<usize> = (0..g.n()).filter(|&v| dist[v] <= radius).collect();
    let mut relabel = vec![usize::MAX; g.n()];
    for (i, &v) in keep.iter().enumerate() {
        relabel[v] = i;
    }
    let adj = keep
        .iter()
        .map(|&v| {
            g.adj[v]
                .iter()
                .filter(|&&w| relabel[w] != usize::MAX)
                .map(|&w| relabel[w])
                .collect()
        })
        .collect();
    Graph::from_adjacency(adj, relabel[center], g.has_rotation)
}

/// Simple path `0 - 1 - ... - (n-1)` rooted at 0.
pub fn path_graph(n: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Graph::from_edges(n, &edges, 0)
}

/// Star with centre 0 and `leaves` leaves.
pub fn star_graph(leaves: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
    Graph::from_edges(leaves + 1, &edges, 0)
}

/// Cycle on `n >= 3` vertices.
pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::param("cycle needs at least 3 vertices"));
    }
    let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    edges.push((n - 1, 0));
    Graph::from_edges(n, &edges, 0)
}

// ---------------------------------------------------------------------------
// Hyperbolic tilings
// ---------------------------------------------------------------------------

/// Disk patch of a {p,q} tiling grown face-layer by face-layer around a
/// central vertex. `rot[v]` is counterclockwise; for a vertex on the current
/// boundary it starts at the next boundary vertex and ends at the previous
/// one, so outward edges are appended.
struct TilingPatch {
    p: usize,
    q: usize,
    rot: Vec<Vec<usize>>,
    boundary: Vec<usize>,
}

impl TilingPatch {
    fn vertex_star(p: usize, q: usize) -> Self {
        let mut rot: Vec<Vec<usize>> = vec![Vec::new()];
        let spokes: Vec<usize> = (1..=q).collect();
        rot[0] = spokes.clone();
        rot.extend((0..q).map(|_| Vec::new()));
        let mut boundary = Vec::new();
        for k in 0..q {
            boundary.push(spokes[k]);
            for _ in 0..p - 3 {
                rot.push(Vec::new());
                boundary.push(rot.len() - 1);
            }
        }
        let m = boundary.len();
        for (i, &v) in boundary.iter().enumerate() {
            let next = boundary[(i + 1) % m];
            let prev = boundary[(i + m - 1) % m];
            rot[v] = if v <= q { vec![next, 0, prev] } else { vec![next, prev] };
        }
        TilingPatch { p, q, rot, boundary }
    }

    fn add_vertex(&mut self) -> usize {
        self.rot.push(Vec::new());
        self.rot.len() - 1
    }

    /// Attaches one full layer of faces around the current boundary.
    fn grow(&mut self) -> Result<()> {
        let (p, q) = (self.p, self.q);
        let m = self.boundary.len();
        let stubs: Vec<usize> = self
            .boundary
            .iter()
            .map(|&v| q.checked_sub(self.rot[v].len()))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::param("tiling patch: vertex degree exceeds q"))?;
        let stub_pos: Vec<usize> = (0..m).filter(|&i| stubs[i] > 0).collect();
        if stub_pos.is_empty() {
            return Err(Error::param("tiling patch closed up; (p,q) is not hyperbolic"));
        }
        let gap_vertices = |j: usize| -> Result<usize> {
            // new vertices on a face spanning j boundary edges
            p.checked_sub(j + 1)
                .filter(|&k| k >= 1)
                .ok_or_else(|| Error::param("tiling patch: degenerate face layer"))
        };
        let k = stub_pos.len();
        let gaps: Vec<usize> = (0..k)
            .map(|t| {
                let a = stub_pos[t];
                let b = stub_pos[(t + 1) % k];
                let j = if k == 1 { m } else { (b + m - a) % m };
                gap_vertices(j)
            })
            .collect::<Result<_>>()?;
        let wrap_shared = gaps[k - 1] == 1;

        let mut seq: Vec<usize> = Vec::new();
        let mut attach: Vec<(usize, usize)> = Vec::new();
        for t in 0..k {
            let bv = self.boundary[stub_pos[t]];
            let count = stubs[stub_pos[t]];
            for s in 0..count {
                let shared_prev = s == 0 && t > 0 && gaps[t - 1] == 1;
                let shared_wrap = s + 1 == count && t + 1 == k && wrap_shared;
                let end = match (shared_prev, shared_wrap) {
                    (true, true) => {
                        return Err(Error::param("tiling patch: degenerate face layer"))
                    }
                    (true, false) => *seq.last().unwrap(),
                    (false, true) => seq[0],
                    (false, false) => {
                        let x = self.add_vertex();
                        seq.push(x);
                        x
                    }
                };
                self.rot[bv].push(end);
                attach.push((end, bv));
                if s + 1 < count {
                    for _ in 0..p - 3 {
                        let x = self.add_vertex();
                        seq.push(x);
                    }
                }
            }
            if gaps[t] >= 2 {
                for _ in 0..gaps[t] - 2 {
                    let x = self.add_vertex();
                    seq.push(x);
                }
            }
        }
        let len = seq.len();
        let mut olds: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for (x, b) in attach {
            olds.entry(x).or_default().push(b);
        }
        for (i, &x) in seq.iter().enumerate() {
            let next = seq[(i + 1) % len];
            let prev = seq[(i + len - 1) % len];
            let mut r = vec![next];
            if let Some(list) = olds.get(&x) {
                if i == 0 && wrap_shared {
                    // attached by the first stub, then by the last one
                    r.extend(list.iter());
                } else {
                    r.extend(list.iter().rev());
                }
            }
            r.push(prev);
            self.rot[x] = r;
        }
        self.boundary = seq;
        Ok(())
    }
}

/// Radius-`r` ball around a vertex of the {p,q} tiling (faces are p-gons,
/// q faces meet at every vertex), with a counterclockwise rotation system.
pub fn build_hyperbolic_ball(p: usize, q: usize, r: u32) -> Result<Graph> {
    if p < 3 || q < 3 || (p - 2) * (q - 2) <= 4 {
        return Err(Error::param(format!(
            "{{{p},{q}}} is not a hyperbolic tiling: need (p-2)(q-2) > 4"
        )));
    }
    let mut patch = TilingPatch::vertex_star(p, q);
    loop {
        let dist = bfs_distances(&patch.rot, 0);
        let exposed = patch
            .boundary
            .iter()
            .any(|&v| dist[v].is_some_and(|d| d <= r));
        if !exposed {
            break;
        }
        if patch.rot.len() > MAX_VERTICES {
            return Err(Error::Size {
                what: "tiling patch vertex count",
                actual: patch.rot.len() as u128,
                limit: MAX_VERTICES as u128,
            });
        }
        patch.grow()?;
    }
    // relabel the ball in BFS discovery order, scanning rotations
    let full = &patch.rot;
    let mut label = vec![usize::MAX; full.len()];
    let mut order = vec![0usize];
    label[0] = 0;
    let mut depth = vec![0u32];
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        let d = depth[head];
        head += 1;
        if d == r {
            continue;
        }
        for &w in &full[v] {
            if label[w] == usize::MAX {
                label[w] = order.len();
                order.push(w);
                depth.push(d + 1);
            }
        }
    }
    let adj = order
        .iter()
        .map(|&v| {
            full[v]
                .iter()
                .filter(|&&w| label[w] != usize::MAX)
                .map(|&w| label[w])
                .collect()
        })
        .collect();
    Graph::from_adjacency(adj, 0, true)
}

// ---------------------------------------------------------------------------
// Isoperimetry
// ---------------------------------------------------------------------------

/// Minimiser of |∂A|/|A| over proper nonempty subsets with |A| bounded,
/// where ∂A is the set of vertices of A with a neighbour outside A.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CheegerProfile {
    pub ratio: f64,
    pub witness: Vec<usize>,
    /// `true` when every subset was examined, `false` when only connected
    /// subsets were.
    pub exhaustive: bool,
    pub subsets_examined: u64,
}

/// Vertex count up to which all subsets are enumerated.
pub const CHEEGER_FULL_LIMIT: usize = 24;
/// Budget on connected subsets examined for larger graphs.
pub const CHEEGER_CONNECTED_BUDGET: u64 = 20_000_000;

pub fn cheeger_profile(g: &Graph, max_subset_size: usize) -> Result<CheegerProfile> {
    let n = g.n();
    if n < 2 {
        return Err(Error::param("cheeger profile needs at least two vertices"));
    }
    let cap = max_subset_size.min(n - 1);
    if cap == 0 {
        return Err(Error::param("max_subset_size must be >= 1"));
    }
    if n <= CHEEGER_FULL_LIMIT {
        let nbr: Vec<u32> = (0..n)
            .map(|v| g.adj[v].iter().fold(0u32, |m, &w| m | (1 << w)))
            .collect();
        let full = (1u32 << n) - 1;
        let mut best = (f64::INFINITY, 0u32);
        let mut examined = 0u64;
        for set in 1..full {
            let size = set.count_ones() as usize;
            if size > cap {
                continue;
            }
            examined += 1;
            let outside = !set & full;
            let boundary = (0..n)
                .filter(|&v| set >> v & 1 == 1 && nbr[v] & outside != 0)
                .count();
            let ratio = boundary as f64 / size as f64;
            if ratio < best.0 {
                best = (ratio, set);
            }
        }
        let witness = (0..n).filter(|&v| best.1 >> v & 1 == 1).collect();
        return Ok(CheegerProfile {
            ratio: best.0,
            witness,
            exhaustive: true,
            subsets_examined: examined,
        });
    }

    let mut search = ConnectedSubsets {
        g,
        cap,
        in_set: vec![false; n],
        blocked: vec![0u32; n],
        members: Vec::new(),
        best: (f64::INFINITY, Vec::new()),
        examined: 0,
    };
    for s in 0..n {
        search.members.push(s);
        search.in_set[s] = true;
        search.block(s, 1);
        let ext: Vec<usize> = g.adj[s].iter().copied().filter(|&u| u > s).collect();
        search.extend(s, ext)?;
        search.block(s, -1);
        search.in_set[s] = false;
        search.members.pop();
    }
    Ok(CheegerProfile {
        ratio: search.best.0,
        witness: search.best.1,
        exhaustive: false,
        subsets_examined: search.examined,
    })
}

/// ESU-style enumeration of connected vertex sets whose smallest label is
/// the start vertex; each set is visited exactly once.
struct ConnectedSubsets<'a> {
    g: &'a Graph,
    cap: usize,
    in_set: Vec<bool>,
    /// number of set members adjacent to (or equal to) each vertex
    blocked: Vec<u32>,
    members: Vec<usize>,
    best: (f64, Vec<usize>),
    examined: u64,
}

impl ConnectedSubsets<'_> {
    fn block(&mut self, v: usize, delta: i32) {
        let apply = |c: &mut u32| *c = (*c as i32 + delta) as u32;
        apply(&mut self.blocked[v]);
        for &w in &self.g.adj[v] {
            apply(&mut self.blocked[w]);
        }
    }

    fn record(&mut self) -> Result<()> {
        self.examined += 1;
        if self.examined > CHEEGER_CONNECTED_BUDGET {
            return Err(Error::Size {
                what: "connected subsets for cheeger profile",
                actual: self.examined as u128,
                limit: CHEEGER_CONNECTED_BUDGET as u128,
            });
        }
        let boundary = self
            .members
            .iter()
            .filter(|&&v| self.g.adj[v].iter().any(|&w| !self.in_set[w]))
            .count();
        let ratio = boundary as f64 / self.members.len() as f64;
        if ratio < self.best.0 {
            let mut w = self.members.clone();
            w.sort_unstable();
            self.best = (ratio, w);
        }
        Ok(())
    }

    fn extend(&mut self, start: usize, mut ext: Vec<usize>) -> Result<()> {
        self.record()?;
        if self.members.len() == self.cap {
            return Ok(());
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &self.g.adj[w] {
                if u > start && !self.in_set[u] && self.blocked[u] == 0 && !next.contains(&u) {
                    next.push(u);
                }
            }
            self.members.push(w);
            self.in_set[w] = true;
            self.block(w, 1);
            self.extend(start, next)?;
            self.block(w, -1);
            self.in_set[w] = false;
            self.members.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bary_tree_counts() {
        let g = build_bary_tree(2, 0).unwrap();
        assert_eq!((g.n(), g.edge_count()), (1, 0));
        let g = build_bary_tree(2, 3).unwrap();
        assert_eq!((g.n(), g.edge_count()), (15, 14));
        let g = build_bary_tree(3, 2).unwrap();
        assert_eq!((g.n(), g.max_degree()), (13, 4));
        assert_eq!(g.bary_shape(), Some((3, 2)));
        assert_eq!(g.rotation(4).unwrap(), &[1]);
        assert_eq!(g.rotation(1).unwrap(), &[0, 4, 5, 6]);
    }

    #[test]
    fn bary_tree_rejects_bad_branching() {
        assert!(matches!(build_bary_tree(1, 3), Err(Error::Parameter(_))));
        assert!(matches!(build_bary_tree(2, 40), Err(Error::Size { .. })));
    }

    #[test]
    fn augmented_counts() {
        let g = build_augmented_tree(2, 2).unwrap();
        assert_eq!((g.n(), g.edge_count()), (7, 10));
        let g = build_augmented_tree(2, 1).unwrap();
        assert_eq!((g.n(), g.edge_count()), (3, 3));
        let g = build_augmented_tree(3, 1).unwrap();
        assert_eq!((g.n(), g.edge_count()), (4, 5));
        // vertex 4 (level 2, second from left): parent 1, left 3, right 5
        let g = build_augmented_tree(2, 2).unwrap();
        assert_eq!(g.rotation(4).unwrap(), &[1, 3, 5]);
        assert_eq!(g.rotation(1).unwrap(), &[0, 3, 4, 2]);
    }

    #[test]
    fn hyperbolic_small_balls() {
        let g = build_hyperbolic_ball(3, 7, 1).unwrap();
        assert_eq!((g.n(), g.edge_count()), (8, 14));
        let g = build_hyperbolic_ball(5, 4, 0).unwrap();
        assert_eq!(g.n(), 1);
        assert!(build_hyperbolic_ball(4, 4, 2).is_err());
        assert!(build_hyperbolic_ball(3, 6, 2).is_err());
    }

    #[test]
    fn ball_examples() {
        let t = build_bary_tree(2, 3).unwrap();
        let s = ball(&t, 0, 1).unwrap();
        assert_eq!((s.n(), s.edge_count()), (3, 2));
        let single = ball(&t, 9, 0).unwrap();
        assert_eq!(single.n(), 1);
        let aug = build_augmented_tree(2, 2).unwrap();
        let tri = ball(&aug, 0, 1).unwrap();
        assert_eq!((tri.n(), tri.edge_count()), (3, 3));
    }

    #[test]
    fn cheeger_examples() {
        let e = path_graph(2).unwrap();
        let c = cheeger_profile(&e, 1).unwrap();
        assert_eq!(c.ratio, 1.0);
        assert_eq!(c.witness.len(), 1);
        let p4 = path_graph(4).unwrap();
        let c = cheeger_profile(&p4, 2).unwrap();
        assert_eq!(c.ratio, 0.5);
        assert!(c.witness == vec![0, 1] || c.witness == vec![2, 3]);
    }

    #[test]
    fn text_rejects_bad_levels() {
        let text = "GLGRAPH 1\nn 2 root 0\nv 0 level 0 nbrs 1\nv 1 level 2 nbrs 0\n";
        match Graph::from_text(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Graph::from_text("GRAPH\n").is_err());
    }

    #[test]
    fn single_vertex_round_trip() {
        let g = build_bary_tree(2, 0).unwrap();
        let text = g.to_text();
        assert_eq!(text, "GLGRAPH 1\nn 1 root 0 rotation\nv 0 level 0 nbrs \n");
        assert_eq!(Graph::from_text(&text).unwrap(), g);
    }
}
