//! Graph representation, edge-list ingestion and the purely structural
//! quantities: degrees, volumes, cuts, normalized cut, induced subgraphs.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SymOperator};

/// Undirected graph on nodes `0..n` with a symmetric, zero-diagonal,
/// nonnegative weighted adjacency. Unweighted graphs store literal `1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    /// `adj[i]` sorted by neighbour id; every (i,j,w) is mirrored in `adj[j]`.
    adj: Vec<Vec<(usize, f64)>>,
    weighted: bool,
}

impl Graph {
    pub fn empty(n: usize, weighted: bool) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            weighted,
        }
    }

    /// Builds a graph from undirected edges. Each pair may appear once, in
    /// either orientation.
    pub fn from_edges<I>(n: usize, edges: I, weighted: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u},{v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at node {u}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u},{v}) has invalid weight {w}"
                )));
            }
            if !weighted && w != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u},{v}) has weight {w} in an unweighted graph"
                )));
            }
            let key = (u.min(v), u.max(v));
            if map.insert(key, w).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(Self::from_map(n, map, weighted))
    }

    fn from_map(n: usize, map: BTreeMap<(usize, usize), f64>, weighted: bool) -> Self {
        let mut adj = vec![Vec::new(); n];
        for ((u, v), w) in map {
            if w == 0.0 {
                continue;
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for row in &mut adj {
            row.sort_by_key(|&(j, _)| j);
        }
        Self { adj, weighted }
    }

    /// Converts a dense matrix into a graph, dropping zero entries. The
    /// matrix must be symmetric with zero diagonal and nonnegative entries;
    /// for `weighted = false` every nonzero entry must be exactly 1.
    pub fn from_dense(m: &DenseMatrix, weighted: bool) -> Result<Self> {
        let n = m.n();
        let mut edges = Vec::new();
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let w = m.get(i, j);
                if w != m.get(j, i) {
                    return Err(Error::InvalidParameter(format!("asymmetric entry ({i},{j})")));
                }
                if w != 0.0 {
                    edges.push((i, j, w));
                }
            }
        }
        Self::from_edges(n, edges, weighted)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_graph(self)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    /// Stored weight of `(i,j)`, zero if absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adj[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|p| self.adj[i][p].1)
            .unwrap_or(0.0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weight(i, j) != 0.0
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&(j, _)| j > i)
                .map(move |&(j, w)| (i, j, w))
        })
    }

    /// `d = A·1`.
    pub fn degree_vector(&self) -> Vec<f64> {
        self.adj
            .iter()
            .map(|row| row.iter().map(|&(_, w)| w).sum())
            .collect()
    }

    pub fn max_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).fold(0.0, f64::max)
    }

    pub fn mean_positive_weight(&self) -> f64 {
        let m = self.edge_count();
        if m == 0 {
            return 0.0;
        }
        self.edges().map(|(_, _, w)| w).sum::<f64>() / m as f64
    }

    /// Weighted copy with every entry divided by `c`.
    pub fn divided_by(&self, c: f64) -> Graph {
        let adj = self
            .adj
            .iter()
            .map(|row| row.iter().map(|&(j, w)| (j, w / c)).collect())
            .collect();
        Graph {
            adj,
            weighted: true,
        }
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Serializes as `u v` (unweighted) or `u v w` lines, one per edge with `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (i, j, w) in self.edges() {
            if self.weighted {
                let _ = writeln!(out, "{i} {j} {w}");
            } else {
                let _ = writeln!(out, "{i} {j}");
            }
        }
        out
    }
}

impl SymOperator for Graph {
    fn dim(&self) -> usize {
        self.node_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.adj) {
            *yi = row.iter().map(|&(j, w)| w * x[j]).sum();
        }
    }
}

/// Parses an edge list. Lines are `u v` or `u v w` with 0-based ids; blank
/// lines and lines starting with `#` are skipped. The node count is the
/// largest id plus one.
pub fn load_edge_list<R: BufRead>(reader: R, weighted: bool) -> Result<Graph> {
    let (n, edges) = parse_edges(reader, weighted, |id, _| Ok(id))?;
    build_checked(n, edges, weighted)
}

/// Like [`load_edge_list`] but accepts arbitrary nonnegative integer ids and
/// remaps them densely in order of first appearance. Returns the graph and
/// the external id of every internal node.
pub fn load_edge_list_remapped<R: BufRead>(reader: R, weighted: bool) -> Result<(Graph, Vec<u64>)> {
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut external = Vec::new();
    let (n, edges) = parse_edges(reader, weighted, |raw, _| {
        Ok(*ids.entry(raw as u64).or_insert_with(|| {
            external.push(raw as u64);
            external.len() - 1
        }))
    })?;
    let _ = n;
    let g = build_checked(external.len(), edges, weighted)?;
    Ok((g, external))
}

type LineEdge = (usize, usize, usize, f64);

fn parse_edges<R, F>(reader: R, weighted: bool, mut map_id: F) -> Result<(usize, Vec<LineEdge>)>
where
    R: BufRead,
    F: FnMut(usize, usize) -> Result<usize>,
{
    let mut edges = Vec::new();
    let mut n = 0;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let fields: Vec<&str> = t.split_whitespace().collect();
        let w = match (fields.len(), weighted) {
            (2, _) => 1.0,
            (3, true) => fields[2]
                .parse::<f64>()
                .map_err(|_| err(format!("bad weight {:?}", fields[2])))?,
            (3, false) => return Err(err("weight column in an unweighted edge list".into())),
            _ => return Err(err(format!("expected `u v` or `u v w`, got {t:?}"))),
        };
        let parse_id = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("bad node id {s:?}")))
        };
        let u = map_id(parse_id(fields[0])?, lineno)?;
        let v = map_id(parse_id(fields[1])?, lineno)?;
        if u == v {
            return Err(err(format!("self-loop at node {}", fields[0])));
        }
        if w.is_nan() || w < 0.0 {
            return Err(err(format!("negative weight {w}")));
        }
        if w == 0.0 || w.is_infinite() {
            return Err(err(format!("weight must be positive and finite, got {w}")));
        }
        n = n.max(u + 1).max(v + 1);
        edges.push((lineno, u, v, w));
    }
    Ok((n, edges))
}

fn build_checked(n: usize, edges: Vec<LineEdge>, weighted: bool) -> Result<Graph> {
    let mut map = BTreeMap::new();
    for (line, u, v, w) in edges {
        if map.insert((u.min(v), u.max(v)), w).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate edge ({u},{v})"),
            });
        }
    }
    Ok(Graph::from_map(n, map, weighted))
}

/// The attacker's target set `S` together with its complement `S′`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    members: Vec<usize>,
    complement: Vec<usize>,
    mask: Vec<bool>,
}

impl TargetSet {
    /// `S` must be a nonempty proper subset of `0..n`. Duplicates are ignored.
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; n];
        for i in members {
            if i >= n {
                return Err(Error::InvalidTarget(format!("node {i} out of range for {n} nodes")));
            }
            mask[i] = true;
        }
        let members: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        let complement: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
        if members.is_empty() {
            return Err(Error::InvalidTarget("target set is empty".into()));
        }
        Ok(Self {
            members,
            complement,
            mask,
        })
    }

    /// Like [`TargetSet::new`], but rejects `S = V`.
    pub fn new_proper(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let s = Self::new(n, members)?;
        if s.complement.is_empty() {
            return Err(Error::InvalidTarget("target set covers every node".into()));
        }
        Ok(s)
    }

    /// Sorted member ids; position `k` is node `members()[k]` of the induced subgraph.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    /// Characteristic vector `x_S`.
    pub fn indicator(&self) -> Vec<f64> {
        self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    pub fn to_lines(&self) -> String {
        self.members.iter().map(|i| format!("{i}\n")).collect()
    }
}

/// Parses a target-set file: one node id per line, `#` comments allowed.
pub fn load_target_set<R: BufRead>(reader: R, n: usize) -> Result<TargetSet> {
    let mut ids = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let id = t.parse::<usize>().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("bad node id {t:?}"),
        })?;
        ids.push(id);
    }
    TargetSet::new_proper(n, ids)
}

/// `d = A·1` as a free function.
pub fn degree_vector(g: &Graph) -> Vec<f64> {
    g.degree_vector()
}

/// Cut weight and the two volumes `(cut(S,S′), vol(S), vol(S′))`, by direct
/// summation.
pub fn cut_and_volumes(g: &Graph, s: &TargetSet) -> (f64, f64, f64) {
    let mut cut = 0.0;
    let mut vol_s = 0.0;
    let mut vol_c = 0.0;
    for i in 0..g.node_count() {
        let in_s = s.contains(i);
        for &(j, w) in g.neighbors(i) {
            if in_s {
                vol_s += w;
                if !s.contains(j) {
                    cut += w;
                }
            } else {
                vol_c += w;
            }
        }
    }
    (cut, vol_s, vol_c)
}

/// `cut(S,S′)·(1/vol(S) + 1/vol(S′))`.
pub fn normalized_cut(g: &Graph, s: &TargetSet) -> Result<f64> {
    let (cut, a, b) = cut_and_volumes(g, s);
    normalized_cut_from_parts(cut, a, b)
}

pub(crate) fn normalized_cut_from_parts(cut: f64, vol_s: f64, vol_c: f64) -> Result<f64> {
    if vol_s <= 0.0 || vol_c <= 0.0 {
        return Err(Error::DegeneratePartition(format!(
            "vol(S) = {vol_s}, vol(S') = {vol_c}"
        )));
    }
    Ok(cut * (1.0 / vol_s + 1.0 / vol_c))
}

/// Subgraph induced by `S`; node `k` of the result is `s.members()[k]`.
pub fn induced_subgraph(g: &Graph, s: &TargetSet) -> Graph {
    let local: HashMap<usize, usize> = s.members().iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut adj = vec![Vec::new(); s.len()];
    for (k, &i) in s.members().iter().enumerate() {
        for &(j, w) in g.neighbors(i) {
            if let Some(&l) = local.get(&j) {
                adj[k].push((l, w));
            }
        }
        adj[k].sort_by_key(|&(j, _)| j);
    }
    Graph {
        adj,
        weighted: g.weighted,
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, edges.iter().map(|&(u, v)| (u, v, 1.0)), false).unwrap()
    }

    pub fn path3() -> Graph {
        unweighted(3, &[(0, 1), (1, 2)])
    }

    pub fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        unweighted(n, &edges)
    }

    pub fn star(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|j| (0, j)).collect();
        unweighted(n, &edges)
    }
}
