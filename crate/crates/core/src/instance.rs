//! Bipartite coverage instances: validation, native text format, SNAP edge
//! lists and the symmetric bipartite transform.
//!
//! Native format (text):
//!
//! ```text
//! n r
//! w_0 w_1 ... w_{r-1}        (or the single token `uniform`)
//! m
//! i j                         (m lines, left index i, right index j)
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Tolerance used when checking that weights sum to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Weighted bipartite graph `(L, R, E)` stored as compressed adjacency in
/// both directions. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageInstance {
    n: usize,
    right_offsets: Vec<usize>,
    right_adj: Vec<usize>,
    left_offsets: Vec<usize>,
    left_adj: Vec<usize>,
    weights: Vec<f64>,
}

impl CoverageInstance {
    /// Builds an instance from per-right-node neighborhoods. Each `N(j)` must
    /// be strictly increasing, in range, and nonempty.
    pub fn from_neighborhoods(
        n: usize,
        neighborhoods: &[Vec<usize>],
        weights: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != neighborhoods.len() {
            return Err(Error::InvalidInstance(format!(
                "expected {} weights, got {}",
                neighborhoods.len(),
                weights.len()
            )));
        }
        let mut right_offsets = Vec::with_capacity(neighborhoods.len() + 1);
        right_offsets.push(0);
        let mut right_adj = Vec::with_capacity(neighborhoods.iter().map(Vec::len).sum());
        for (j, nbrs) in neighborhoods.iter().enumerate() {
            if nbrs.is_empty() {
                return Err(no_neighbors(j));
            }
            for (pos, &i) in nbrs.iter().enumerate() {
                if i >= n {
                    return Err(Error::InvalidInstance(format!(
                        "right node {j} references left node {i} but n = {n}"
                    )));
                }
                if pos > 0 && nbrs[pos - 1] >= i {
                    return Err(Error::InvalidInstance(format!(
                        "neighbors of right node {j} are not strictly increasing"
                    )));
                }
            }
            right_adj.extend_from_slice(nbrs);
            right_offsets.push(right_adj.len());
        }
        let inst = Self::assemble(n, right_offsets, right_adj, weights);
        inst.validate()?;
        Ok(inst)
    }

    /// Builds an instance from an edge list `(left, right)`. Edges may come
    /// in any order but must not repeat.
    pub fn from_edges(
        n: usize,
        r: usize,
        edges: &[(usize, usize)],
        weights: Vec<f64>,
    ) -> Result<Self> {
        let mut nbrs = vec![Vec::new(); r];
        for &(i, j) in edges {
            if j >= r {
                return Err(Error::InvalidInstance(format!(
                    "edge ({i}, {j}) references right node {j} but r = {r}"
                )));
            }
            nbrs[j].push(i);
        }
        for (j, list) in nbrs.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate edge into right node {j}"
                )));
            }
        }
        Self::from_neighborhoods(n, &nbrs, weights)
    }

    fn assemble(
        n: usize,
        right_offsets: Vec<usize>,
        right_adj: Vec<usize>,
        weights: Vec<f64>,
    ) -> Self {
        let r = right_offsets.len() - 1;
        let mut left_deg = vec![0usize; n];
        for &i in &right_adj {
            left_deg[i] += 1;
        }
        let mut left_offsets = Vec::with_capacity(n + 1);
        left_offsets.push(0);
        for d in &left_deg {
            left_offsets.push(left_offsets.last().unwrap() + d);
        }
        let mut cursor = left_offsets[..n].to_vec();
        let mut left_adj = vec![0usize; right_adj.len()];
        // right nodes visited in ascending order keep each left list sorted
        for j in 0..r {
            for &i in &right_adj[right_offsets[j]..right_offsets[j + 1]] {
                left_adj[cursor[i]] = j;
                cursor[i] += 1;
            }
        }
        Self {
            n,
            right_offsets,
            right_adj,
            left_offsets,
            left_adj,
            weights,
        }
    }

    /// Checks every structural invariant. Weights must be finite and
    /// nonnegative with a positive sum; normalization is not required.
    pub fn validate(&self) -> Result<()> {
        let r = self.r();
        if self.weights.len() != r {
            return Err(Error::InvalidInstance(format!(
                "expected {r} weights, got {}",
                self.weights.len()
            )));
        }
        for j in 0..r {
            let nbrs = self.neighbors(j);
            if nbrs.is_empty() {
                return Err(no_neighbors(j));
            }
            if nbrs.iter().any(|&i| i >= self.n) {
                return Err(Error::InvalidInstance(format!(
                    "right node {j} has a left index out of range"
                )));
            }
            if nbrs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInstance(format!(
                    "neighbors of right node {j} are not strictly increasing"
                )));
            }
        }
        for (j, &w) in self.weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "right node {j} has invalid weight {w}"
                )));
            }
        }
        if r > 0 && self.total_weight() <= 0.0 {
            return Err(Error::InvalidInstance("all weights are zero".into()));
        }
        if self.left_offsets.len() != self.n + 1 || self.left_adj.len() != self.right_adj.len() {
            return Err(Error::InvalidInstance(
                "left adjacency does not match right adjacency".into(),
            ));
        }
        let mut seen = 0usize;
        for i in 0..self.n {
            for &j in self.right_nodes_of(i) {
                if j >= r || self.neighbors(j).binary_search(&i).is_err() {
                    return Err(Error::InvalidInstance(format!(
                        "left adjacency of {i} lists right node {j} which does not contain it"
                    )));
                }
                seen += 1;
            }
        }
        if seen != self.right_adj.len() {
            return Err(Error::InvalidInstance(
                "left adjacency does not match right adjacency".into(),
            ));
        }
        Ok(())
    }

    /// Number of left nodes (the ground set).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of right nodes.
    pub fn r(&self) -> usize {
        self.right_offsets.len() - 1
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.right_adj.len()
    }

    /// Sorted neighborhood `N(j)` of right node `j`.
    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.right_adj[self.right_offsets[j]..self.right_offsets[j + 1]]
    }

    /// Sorted list of right nodes adjacent to left node `i`.
    pub fn right_nodes_of(&self, i: usize) -> &[usize] {
        &self.left_adj[self.left_offsets[i]..self.left_offsets[i + 1]]
    }

    pub fn degree(&self, j: usize) -> usize {
        self.right_offsets[j + 1] - self.right_offsets[j]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.r()).map(|j| self.degree(j)).max().unwrap_or(0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_weight() - 1.0).abs() <= WEIGHT_SUM_TOL
    }

    /// Returns a copy with weights rescaled to sum to one.
    pub fn normalize_weights(&self) -> Result<Self> {
        let total = self.total_weight();
        if !(total > 0.0) {
            return Err(Error::InvalidInstance(
                "cannot normalize: all weights are zero".into(),
            ));
        }
        let mut out = self.clone();
        for w in &mut out.weights {
            *w /= total;
        }
        Ok(out)
    }

    /// Returns a copy with different weights, validated.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        let mut out = self.clone();
        out.weights = weights;
        out.validate()?;
        Ok(out)
    }

    /// Edges in canonical order (ascending right node, then left node).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.r()).flat_map(move |j| self.neighbors(j).iter().map(move |&i| (i, j)))
    }

    pub fn to_native_string(&self) -> String {
        let mut out = String::with_capacity(16 * (self.m() + self.r() + 2));
        let _ = writeln!(out, "{} {}", self.n, self.r());
        let weights: Vec<String> = self.weights.iter().map(|w| format!("{w:?}")).collect();
        let _ = writeln!(out, "{}", weights.join(" "));
        let _ = writeln!(out, "{}", self.m());
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn save_native(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_native_string())?;
        Ok(())
    }

    pub fn load_native(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse_native(&text, path)
    }

    /// Parses the native text format; `origin` only labels error messages.
    pub fn parse_native(text: &str, origin: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(no, l)| (no + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (no, header) = lines
            .next()
            .ok_or_else(|| perr(1, "missing header".into()))?;
        let head: Vec<usize> = parse_tokens(header).map_err(|e| perr(no, e))?;
        let [n, r] = head[..] else {
            return Err(perr(
                no,
                format!("expected `n r`, got {} values", head.len()),
            ));
        };

        let weights = if r == 0 {
            Vec::new()
        } else {
            let (no, wline) = lines
                .next()
                .ok_or_else(|| perr(no + 1, "missing weights".into()))?;
            if wline == "uniform" {
                if r > text.len() {
                    return Err(perr(
                        no,
                        format!("{r} right nodes cannot all have edges in this file"),
                    ));
                }
                vec![1.0 / r as f64; r]
            } else {
                let w: Vec<f64> = parse_tokens(wline).map_err(|e| perr(no, e))?;
                if w.len() != r {
                    return Err(perr(no, format!("expected {r} weights, got {}", w.len())));
                }
                w
            }
        };

        let (m_line, mline) = lines
            .next()
            .ok_or_else(|| perr(0, "missing edge count".into()))?;
        let no = m_line;
        let m: Vec<usize> = parse_tokens(mline).map_err(|e| perr(no, e))?;
        let [m] = m[..] else {
            return Err(perr(no, "expected a single edge count".into()));
        };

        // m comes from the file; don't trust it for the allocation
        let mut edges = Vec::with_capacity(m.min(text.len() / 4));
        for (no, line) in lines.by_ref() {
            let pair: Vec<usize> = parse_tokens(line).map_err(|e| perr(no, e))?;
            let [i, j] = pair[..] else {
                return Err(perr(no, "expected `i j`".into()));
            };
            if i >= n {
                return Err(perr(no, format!("left index {i} out of range (n = {n})")));
            }
            if j >= r {
                return Err(perr(no, format!("right index {j} out of range (r = {r})")));
            }
            edges.push((i, j));
        }
        if edges.len() != m {
            return Err(perr(
                m_line,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        Self::from_edges(n, r, &edges, weights)
    }
}

fn no_neighbors(j: usize) -> Error {
    Error::InvalidInstance(format!("right node {j} has no neighbors"))
}

fn parse_tokens<T: std::str::FromStr>(line: &str) -> std::result::Result<Vec<T>, String> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| format!("cannot parse token `{tok}`"))
        })
        .collect()
}

/// Simple undirected graph with dense node ids. `original_ids[v]` is the id
/// node `v` carried in its source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    original_ids: Vec<u64>,
}

impl UndirectedGraph {
    /// Normalizes an edge list: self-loops are dropped, `{u,v}` and `{v,u}`
    /// are merged, and edges are stored as sorted `(min, max)` pairs.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {num_nodes} nodes"
                )));
            }
            if u != v {
                set.insert((u.min(v), u.max(v)));
            }
        }
        Ok(Self {
            num_nodes,
            edges: set.into_iter().collect(),
            original_ids: (0..num_nodes as u64).collect(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.original_ids
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }
}

/// Reads a SNAP-style edge list: whitespace-separated integer pairs, `#`
/// comment lines, extra columns ignored. Node ids are remapped densely in
/// ascending order of their original value.
pub fn load_snap_edgelist(path: impl AsRef<Path>) -> Result<UndirectedGraph> {
    let path = path.as_ref();
    let reader = BufReader::new(fs::File::open(path)?);
    let mut raw = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let mut next_id = || -> Result<u64> {
            let tok = toks.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: no + 1,
                msg: "expected two node ids".into(),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: no + 1,
                msg: format!("cannot parse node id `{tok}`"),
            })
        };
        let u = next_id()?;
        let v = next_id()?;
        raw.push((u, v));
    }
    graph_from_raw_pairs(&raw)
}

/// Remaps arbitrary `u64` node ids (ascending) and builds the simple graph.
pub fn graph_from_raw_pairs(raw: &[(u64, u64)]) -> Result<UndirectedGraph> {
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() {
        return Err(Error::InvalidArgument("edge list is empty".into()));
    }
    let index = |id: u64| ids.binary_search(&id).unwrap();
    let mut graph =
        UndirectedGraph::new(ids.len(), raw.iter().map(|&(u, v)| (index(u), index(v))))?;
    graph.original_ids = ids;
    Ok(graph)
}

/// Symmetric bipartite coverage instance of an undirected graph: `L = R = V`,
/// each `j` covers itself and its graph neighbors, uniform weights `1/V`.
pub fn build_symmetric_bipartite(g: &UndirectedGraph) -> Result<CoverageInstance> {
    let v = g.num_nodes();
    let mut nbrs: Vec<Vec<usize>> = (0..v).map(|j| vec![j]).collect();
    for &(a, b) in g.edges() {
        nbrs[b].push(a);
        nbrs[a].push(b);
    }
    for list in &mut nbrs {
        list.sort_unstable();
    }
    CoverageInstance::from_neighborhoods(v, &nbrs, vec![1.0 / v as f64; v])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn snap_path_and_comments() {
        let f = write_tmp("0 1\n1 2");
        let g = load_snap_edgelist(f.path()).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);

        let f = write_tmp("# comment\n5 7");
        let g = load_snap_edgelist(f.path()).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.original_ids(), &[5, 7]);
    }

    #[test]
    fn snap_dedups_and_drops_self_loops() {
        let f = write_tmp("3 1\n1 3\n3 1\n2 2\n");
        let g = load_snap_edgelist(f.path()).unwrap();
        // ids {1,2,3} -> {0,1,2}; node 2 survives through its self-loop line
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges(), &[(0, 2)]);
    }

    #[test]
    fn snap_remap_is_order_independent() {
        let a = write_tmp("10 20\n20 30\n");
        let b = write_tmp("30 20\n# x\n20 10\n");
        assert_eq!(
            load_snap_edgelist(a.path()).unwrap(),
            load_snap_edgelist(b.path()).unwrap()
        );
    }

    #[test]
    fn snap_errors() {
        let f = write_tmp("0 1\n1 x\n");
        match load_snap_edgelist(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let f = write_tmp("# only comments\n");
        assert!(load_snap_edgelist(f.path()).is_err());
        let f = write_tmp("7\n");
        assert!(matches!(
            load_snap_edgelist(f.path()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn symmetric_bipartite_sizes() {
        let g = UndirectedGraph::new(2, [(0, 1)]).unwrap();
        let inst = build_symmetric_bipartite(&g).unwrap();
        assert_eq!((inst.n(), inst.r(), inst.m()), (2, 2, 4));

        let single = graph_from_raw_pairs(&[(4, 4)]).unwrap();
        let inst = build_symmetric_bipartite(&single).unwrap();
        assert_eq!((inst.n(), inst.m()), (1, 1));
        assert_eq!(inst.neighbors(0), &[0]);
    }

    #[test]
    fn normalize_examples() {
        let nb = vec![vec![0], vec![0]];
        let inst = CoverageInstance::from_neighborhoods(1, &nb, vec![2.0, 2.0]).unwrap();
        assert_eq!(inst.normalize_weights().unwrap().weights(), &[0.5, 0.5]);
        let inst = CoverageInstance::from_neighborhoods(1, &nb, vec![1.0, 3.0]).unwrap();
        assert_eq!(inst.normalize_weights().unwrap().weights(), &[0.25, 0.75]);
        let one = CoverageInstance::from_neighborhoods(1, &[vec![0]], vec![1.0]).unwrap();
        assert_eq!(one.normalize_weights().unwrap().weights(), &[1.0]);
        assert!(CoverageInstance::from_neighborhoods(1, &nb, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn native_validation_errors() {
        let f = write_tmp("2 2\n0.5 0.5\n1\n0 0\n");
        let err = CoverageInstance::load_native(f.path()).unwrap_err();
        assert!(
            err.to_string().contains("right node 1 has no neighbors"),
            "{err}"
        );

        let f = write_tmp("2 1\n-1\n1\n0 0\n");
        assert!(CoverageInstance::load_native(f.path()).is_err());

        let f = write_tmp("2 1\n1 1\n1\n0 0\n");
        assert!(CoverageInstance::load_native(f.path()).is_err());

        let f = write_tmp("2 1\n1\n1\n5 0\n");
        assert!(matches!(
            CoverageInstance::load_native(f.path()),
            Err(Error::Parse { line: 4, .. })
        ));

        let f = write_tmp("2 1\n1\n2\n0 0\n0 0\n");
        assert!(CoverageInstance::load_native(f.path()).is_err());
    }

    #[test]
    fn native_uniform_weights() {
        let f = write_tmp("2 2\nuniform\n3\n0 0\n1 0\n1 1\n");
        let inst = CoverageInstance::load_native(f.path()).unwrap();
        assert_eq!(inst.weights(), &[0.5, 0.5]);
        assert_eq!(inst.neighbors(0), &[0, 1]);
        assert_eq!(inst.right_nodes_of(1), &[0, 1]);
    }

    #[test]
    fn native_round_trip() {
        let nb = vec![vec![0, 2], vec![1], vec![0, 1, 2]];
        let inst = CoverageInstance::from_neighborhoods(3, &nb, vec![0.1, 0.2, 0.7000000000000001])
            .unwrap();
        let f = write_tmp(&inst.to_native_string());
        let back = CoverageInstance::load_native(f.path()).unwrap();
        assert_eq!(back, inst);
        let mut file = std::fs::OpenOptions::new()
            .append(true)
            .open(f.path())
            .unwrap();
        writeln!(file, "2 0").unwrap();
        assert!(CoverageInstance::load_native(f.path()).is_err());
    }
}
