//! Graph representation and the shared machinery every solver runs on:
//! breadth-first search, instance normalization and pruning, rooted trees
//! and their metrics, and seeded instance generators.
//!
//! Vertices are dense ids `0..n`. Adjacency lists are kept sorted so that
//! every traversal visits neighbors in ascending id order; all tie-breaks in
//! the crate resolve to the lowest vertex id.

mod bfs;
mod generate;
mod instance;
mod tree;

use std::collections::HashSet;

pub use bfs::{bfs_distances, shortest_path_tree};
pub(crate) use bfs::{bfs, path_to, BfsTree};
pub use generate::{generate_instance, GenParams, Model};
pub use instance::{normalize_terminals, prune_beyond, MulticastInstance, NormalForm, PoiseGuess};
pub use tree::{tree_metrics, PoiseTree, TreeMetrics};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// A directed or undirected simple graph.
///
/// Undirected graphs store every edge once, in the orientation it was given,
/// and expose it in both directions through the adjacency queries.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: Vec<(Vertex, Vertex)>,
    out: Vec<Vec<Vertex>>,
    inc: Vec<Vec<Vertex>>,
    arcs: HashSet<(Vertex, Vertex)>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.directed == other.directed && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new(n: usize, directed: bool, edges: Vec<(Vertex, Vertex)>) -> Result<Self> {
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut arcs = HashSet::with_capacity(edges.len() * 2);
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at {u}")));
            }
            let fresh = if directed {
                arcs.insert((u, v))
            } else {
                arcs.insert((u, v)) && arcs.insert((v, u))
            };
            if !fresh {
                return Err(Error::InvalidArgument(format!("duplicate edge ({u}, {v})")));
            }
            out[u].push(v);
            inc[v].push(u);
            if !directed {
                out[v].push(u);
                inc[u].push(v);
            }
        }
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            directed,
            edges,
            out,
            inc,
            arcs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Edges in stored orientation, one entry per undirected edge.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Out-neighbors in ascending order (all neighbors when undirected).
    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.out[v]
    }

    pub fn in_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.inc[v]
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out[v].len()
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.inc[v].len()
    }

    /// Whether `u -> v` can be traversed. Orientation matters only when directed.
    pub fn has_arc(&self, u: Vertex, v: Vertex) -> bool {
        self.arcs.contains(&(u, v))
    }

    pub(crate) fn adjacency(&self) -> &[Vec<Vertex>] {
        &self.out
    }

    /// The same vertex set with every edge touching a `dropped` vertex removed.
    pub(crate) fn without_incident(&self, dropped: &[bool]) -> Graph {
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| !dropped[u] && !dropped[v])
            .collect();
        Graph::new(self.n, self.directed, edges).expect("subgraph of a valid graph")
    }
}

/// Ceiling of the square root.
pub fn ceil_sqrt(x: usize) -> usize {
    let mut r = (x as f64).sqrt() as usize;
    while r * r > x {
        r -= 1;
    }
    while r * r < x {
        r += 1;
    }
    r
}

/// Ceiling of the cube root.
pub fn ceil_cbrt(x: usize) -> usize {
    let mut r = (x as f64).cbrt() as usize;
    while r > 0 && r * r * r > x {
        r -= 1;
    }
    while r * r * r < x {
        r += 1;
    }
    r
}

/// `⌈log₂ x⌉` with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

pub(crate) fn mask_of(n: usize, set: impl IntoIterator<Item = Vertex>) -> Vec<bool> {
    let mut mask = vec![false; n];
    for v in set {
        mask[v] = true;
    }
    mask
}
