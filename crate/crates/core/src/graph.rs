//! Immutable simple graphs on dense vertex ids `0..n`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::rng;

/// Graphs up to this size also carry a bitmask adjacency view.
pub const MASK_LIMIT: usize = 128;

/// A set of vertices of a graph on `n` vertices, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
    size: usize,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(64)],
            size: 0,
        }
    }

    /// Builds a set from vertex ids; duplicates are ignored.
    pub fn from_vertices(n: usize, vertices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(n);
        for v in vertices {
            if v >= n {
                return Err(precondition(format!("vertex {v} out of range for n={n}")));
            }
            set.insert(v);
        }
        Ok(set)
    }

    /// Universe size.
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    /// Returns true if `v` was newly added.
    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.n, "vertex {v} out of range");
        let (w, b) = (v / 64, 1u64 << (v % 64));
        if self.words[w] & b != 0 {
            return false;
        }
        self.words[w] |= b;
        self.size += 1;
        true
    }

    /// Returns true if `v` was present.
    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.n {
            return false;
        }
        let (w, b) = (v / 64, 1u64 << (v % 64));
        if self.words[w] & b == 0 {
            return false;
        }
        self.words[w] &= !b;
        self.size -= 1;
        true
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Low 128 bits as a mask; only meaningful when `n <= 128`.
    pub fn as_mask(&self) -> u128 {
        let lo = self.words.first().copied().unwrap_or(0) as u128;
        let hi = self.words.get(1).copied().unwrap_or(0) as u128;
        lo | hi << 64
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VertexSet {
    /// Space-separated sorted ids, the CLI's one-set-per-line format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in self.iter() {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// An undirected simple graph. Immutable after construction.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    masks: Option<Vec<u128>>,
    max_degree: usize,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("m", &self.edge_count)
            .field("max_degree", &self.max_degree)
            .finish()
    }
}

/// Plain edge-list form used for (de)serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops and out-of-range endpoints.
    /// Repeated edges (in either orientation) are stored once.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_sorted_adjacency(adjacency))
    }

    fn from_sorted_adjacency(adjacency: Vec<Vec<usize>>) -> Self {
        let n = adjacency.len();
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        let masks = (n <= MASK_LIMIT).then(|| {
            adjacency
                .iter()
                .map(|list| list.iter().fold(0u128, |m, &u| m | 1 << u))
                .collect()
        });
        Self {
            adjacency,
            masks,
            max_degree,
            edge_count,
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Bitmask adjacency view, present when `n <= MASK_LIMIT`.
    pub fn masks(&self) -> Option<&[u128]> {
        self.masks.as_deref()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn to_edge_list(&self) -> EdgeList {
        EdgeList {
            n: self.n(),
            edges: self.edges().collect(),
        }
    }

    /// True iff no edge has both endpoints in `set`.
    pub fn is_independent(&self, set: &VertexSet) -> bool {
        set.iter().all(|v| v < self.n() && self.adjacency[v].iter().all(|&u| !set.contains(u)))
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.adjacency.iter().all(|list| list.len() == d)
    }

    /// Neighbor-intersection triangle test.
    pub fn is_triangle_free(&self) -> bool {
        self.edges().all(|(u, v)| {
            let (a, b) = (&self.adjacency[u], &self.adjacency[v]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => return false,
                }
            }
            true
        })
    }

    /// Vertices of `a` keep their ids; vertices of `b` are shifted by `a.n()`.
    pub fn disjoint_union(a: &Graph, b: &Graph) -> Graph {
        let shift = a.n();
        let adjacency = a
            .adjacency
            .iter()
            .cloned()
            .chain(b.adjacency.iter().map(|list| list.iter().map(|&u| u + shift).collect()))
            .collect();
        Self::from_sorted_adjacency(adjacency)
    }

    /// `copies` disjoint copies of `self`.
    pub fn replicate(&self, copies: usize) -> Graph {
        let n = self.n();
        let adjacency = (0..copies)
            .flat_map(|c| self.adjacency.iter().map(move |list| list.iter().map(|&u| u + c * n).collect()))
            .collect();
        Self::from_sorted_adjacency(adjacency)
    }

    /// Vertex-induced subgraph on `keep` (relabelled in ascending order).
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let adjacency = keep
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adjacency[v]
                    .iter()
                    .filter_map(|&u| (index[u] != usize::MAX).then_some(index[u]))
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        Self::from_sorted_adjacency(adjacency)
    }

    /// Greedy independent set by ascending id, truncated to `k`.
    ///
    /// Each pick removes at most `max_degree + 1` vertices, so the greedy set has
    /// at least `ceil(n / (max_degree + 1))` members.
    pub fn greedy_independent_set(&self, k: usize) -> Result<VertexSet> {
        let n = self.n();
        let mut blocked = vec![false; n];
        let mut set = VertexSet::empty(n);
        for v in 0..n {
            if set.len() == k {
                break;
            }
            if blocked[v] {
                continue;
            }
            set.insert(v);
            blocked[v] = true;
            for &u in &self.adjacency[v] {
                blocked[u] = true;
            }
        }
        if set.len() < k {
            return Err(precondition(format!(
                "greedy found only {} independent vertices, {} requested",
                set.len(),
                k
            )));
        }
        Ok(set)
    }
}

/// Graph with `n` vertices and no edges.
pub fn gen_empty(n: usize) -> Graph {
    Graph::from_sorted_adjacency(vec![Vec::new(); n])
}

/// Complete graph `K_m`.
pub fn gen_clique(m: usize) -> Graph {
    let adjacency = (0..m).map(|v| (0..m).filter(|&u| u != v).collect()).collect();
    Graph::from_sorted_adjacency(adjacency)
}

/// Complete bipartite `K_{s,t}`; the `s` side is `0..s`.
pub fn gen_complete_bipartite(s: usize, t: usize) -> Graph {
    let adjacency = (0..s + t)
        .map(|v| if v < s { (s..s + t).collect() } else { (0..s).collect() })
        .collect();
    Graph::from_sorted_adjacency(adjacency)
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn gen_path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Graph::from_edge_list(n, &edges).expect("path edges are valid")
}

pub fn gen_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(precondition("a cycle needs at least 3 vertices"));
    }
    let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    Graph::from_edge_list(n, &edges)
}

/// Petersen graph: outer cycle 0..5, spokes `i - i+5`, inner pentagram.
pub fn gen_petersen() -> Graph {
    let mut edges = Vec::with_capacity(15);
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    Graph::from_edge_list(10, &edges).expect("petersen edges are valid")
}

/// Gadget `H_{a,b}`: `a` copies of `K_{D,D}` followed by `b` copies of `K_{D+1}`.
pub fn gen_gadget(a: usize, b: usize, delta: usize) -> Result<Graph> {
    if a == 0 && b == 0 {
        return Err(precondition("gadget needs a + b >= 1"));
    }
    if delta < 3 {
        return Err(precondition(format!("gadget degree must be >= 3, got {delta}")));
    }
    let bip = gen_complete_bipartite(delta, delta).replicate(a);
    let cliques = gen_clique(delta + 1).replicate(b);
    Ok(Graph::disjoint_union(&bip, &cliques))
}

/// Default retry budget for [`gen_random_regular`].
pub fn default_regular_retries(n: usize, d: usize) -> usize {
    (10 * n * d).max(1)
}

/// Uniform simple `d`-regular graph by the pairing model, restarting the whole
/// pairing whenever it produces a loop or a repeated edge.
pub fn gen_random_regular(n: usize, d: usize, seed: u64, max_attempts: usize) -> Result<Graph> {
    if (n * d) % 2 != 0 {
        return Err(precondition(format!("n*d must be even (n={n}, d={d})")));
    }
    if d >= n && !(n == 0 && d == 0) {
        return Err(precondition(format!("degree {d} must be below n={n}")));
    }
    let mut rng = rng::substream(seed, &[0x7265_6775]);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..max_attempts {
        points.shuffle(&mut rng);
        let mut adjacency = vec![Vec::with_capacity(d); n];
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adjacency[u].contains(&v) {
                continue 'attempt;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        return Ok(Graph::from_sorted_adjacency(adjacency));
    }
    Err(Error::GenerationFailed {
        attempts: max_attempts,
    })
}

/// Random graph with maximum degree at most `cap`: each vertex pair, in a
/// shuffled order, becomes an edge with probability `p` if both endpoints
/// still have room.
pub fn gen_random_bounded(n: usize, cap: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(precondition(format!("edge probability must lie in [0, 1], got {p}")));
    }
    let mut rng = rng::substream(seed, &[0x626f_756e]);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    pairs.shuffle(&mut rng);
    let mut adjacency = vec![Vec::new(); n];
    for (u, v) in pairs {
        if adjacency[u].len() < cap && adjacency[v].len() < cap && rng.random_bool(p) {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    Ok(Graph::from_sorted_adjacency(adjacency))
}

/// Parses the edge-list text format: a header line `n m`, then `m` lines `u v`.
/// Blank lines and `#` comments are ignored.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let parse_pair = |line: usize, l: &str| -> Result<(usize, usize)> {
        let mut it = l.split_whitespace();
        let mut next = || -> Result<usize> {
            it.next()
                .ok_or_else(|| Error::Parse {
                    line,
                    message: "expected two integers".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line,
                    message: format!("{e}"),
                })
        };
        let pair = (next()?, next()?);
        if it.next().is_some() {
            return Err(Error::Parse {
                line,
                message: "trailing tokens".into(),
            });
        }
        Ok(pair)
    };

    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing header `n m`".into(),
    })?;
    let (n, m) = parse_pair(line, header)?;
    let mut edges = Vec::with_capacity(m);
    for (line, l) in lines {
        edges.push(parse_pair(line, l)?);
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line,
            message: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    Graph::from_edge_list(n, &edges)
}

/// Writes the edge-list text format (canonical edge order, `u < v`).
pub fn format_edge_list(graph: &Graph) -> String {
    let mut out = format!("{} {}\n", graph.n(), graph.edge_count());
    for (u, v) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}
