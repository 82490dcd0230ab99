//! Simple undirected graphs and their text format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Largest vertex count accepted by the bitmask-based graph oracles.
pub const MAX_BITMASK_VERTICES: usize = 64;

/// Undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Rejects self-loops, duplicate edges (in either orientation) and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one vertex".into()));
        }
        let mut norm: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Self { n, edges: norm, adj })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|v| (v - 1, v)))
    }

    /// Star with hub 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Result<Self> {
        Self::new(leaves + 1, (1..=leaves).map(|v| (0, v)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// Adjacency bitmasks (open neighbourhoods); requires `n <= 64`.
    pub fn adjacency_masks(&self) -> Result<Vec<u64>> {
        if self.n > MAX_BITMASK_VERTICES {
            return Err(Error::GraphTooLarge { n: self.n, max: MAX_BITMASK_VERTICES });
        }
        Ok(self
            .adj
            .iter()
            .map(|a| a.iter().fold(0u64, |m, &v| m | (1u64 << v)))
            .collect())
    }

    /// Parses `n m` followed by `m` lines `u v`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let [n, m] = parse_ints::<2>(header, line)?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (line, l) = lines.next().ok_or(Error::Parse { line, msg: format!("expected {m} edge lines") })?;
            let [u, v] = parse_ints::<2>(l, line)?;
            edges.push((u, v));
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse { line, msg: "trailing content after edge list".into() });
        }
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn parse_ints<const N: usize>(line: &str, line_no: usize) -> Result<[usize; N]> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != N {
        return Err(Error::Parse { line: line_no, msg: format!("expected {N} integers, got {:?}", line) });
    }
    let mut out = [0usize; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|e| Error::Parse { line: line_no, msg: format!("{p:?}: {e}") })?;
    }
    Ok(out)
}
