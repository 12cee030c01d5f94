//! Directed communication topologies, column-stochastic mixing and the
//! weighted norm under which mixing contracts.

mod mixing;
mod norm;

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use mixing::{contraction_factor, perron_vector, MixingMatrix, PerronOptions};
pub use norm::{NormConstruction, NormTransform};

/// Node count plus a set of directed edges `(from, to)`, 0-based, no self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    seed: u64,
}

impl DirectedGraph {
    /// Builds a graph from explicit 0-based edges.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::InvalidArgument(format!("self-loop at node {i}")));
            }
            set.insert((i, j));
        }
        Ok(DirectedGraph { n, edges: set, seed: 0 })
    }

    /// Bidirected ring over `n` nodes plus `extra_edges` distinct directed
    /// edges drawn uniformly without replacement from the remaining pairs.
    pub fn cycle_plus_random(n: usize, extra_edges: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("ring needs n >= 2, got {n}")));
        }
        let mut edges = BTreeSet::new();
        for i in 0..n {
            let j = (i + 1) % n;
            edges.insert((i, j));
            edges.insert((j, i));
        }
        let candidates: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && !edges.contains(&(i, j)))
            .collect();
        if extra_edges > candidates.len() {
            return Err(Error::EdgeBudgetExceeded { n, requested: extra_edges, available: candidates.len() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, candidates.len(), extra_edges).into_vec();
        picked.sort_unstable();
        edges.extend(picked.into_iter().map(|k| candidates[k]));
        Ok(DirectedGraph { n, edges, seed })
    }

    /// Like [`cycle_plus_random`](Self::cycle_plus_random) but retries with an
    /// incremented seed until the result is strongly connected.
    pub fn connected_cycle_plus_random(n: usize, extra_edges: usize, seed: u64, max_retries: usize) -> Result<Self> {
        for attempt in 0..=max_retries as u64 {
            let g = Self::cycle_plus_random(n, extra_edges, seed.wrapping_add(attempt))?;
            if g.is_strongly_connected() {
                return Ok(g);
            }
        }
        Err(Error::NotStronglyConnected)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn out_neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((node, 0)..(node + 1, 0)).map(|&(_, j)| j)
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_neighbors(node).count()
    }

    /// True iff every node reaches every other node along directed edges.
    pub fn is_strongly_connected(&self) -> bool {
        let mut forward = vec![Vec::new(); self.n];
        let mut backward = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            forward[i].push(j);
            backward[j].push(i);
        }
        reaches_all(&forward) && reaches_all(&backward)
    }

    /// Plain-text edge list: `n <count>` header, then one 1-based `i j` per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "{} {}", i + 1, j + 1);
        }
        out
    }

    pub fn parse_edge_list(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse { path: origin.to_path_buf(), line, msg };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| err(1, "empty edge list".into()))?;
        let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["n", count] => count.parse::<usize>().map_err(|e| err(hline + 1, format!("bad node count: {e}")))?,
            _ => return Err(err(hline + 1, "expected header `n <count>`".into())),
        };
        let mut edges = Vec::new();
        for (idx, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1 && v <= n)
                    .ok_or_else(|| err(idx + 1, format!("bad node index `{s}`")))
            };
            match parts.as_slice() {
                [a, b] => edges.push((parse(a)? - 1, parse(b)? - 1)),
                _ => return Err(err(idx + 1, "expected `i j`".into())),
            }
        }
        Self::from_edges(n, edges).map_err(|e| err(0, e.to_string()))
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_edge_list(&text, path)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }
}

fn reaches_all(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}
