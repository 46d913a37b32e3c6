use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{bfs, Graph, PoiseTree, Vertex};
use crate::error::{Error, Result};

/// Graph, root, terminal set and the number `k` of terminals to reach.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct MulticastInstance {
    graph: Graph,
    root: Vertex,
    terminals: BTreeSet<Vertex>,
    k: usize,
}

/// Wire form; field order is the serialized key order.
#[derive(Serialize, Deserialize)]
struct InstanceJson {
    directed: bool,
    n: usize,
    edges: Vec<[Vertex; 2]>,
    root: Vertex,
    terminals: Vec<Vertex>,
    k: usize,
}

impl TryFrom<InstanceJson> for MulticastInstance {
    type Error = Error;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        let graph = Graph::new(
            raw.n,
            raw.directed,
            raw.edges.iter().map(|&[u, v]| (u, v)).collect(),
        )?;
        let terminals: BTreeSet<Vertex> = raw.terminals.iter().copied().collect();
        if terminals.len() != raw.terminals.len() {
            return Err(Error::InvalidArgument("repeated terminal".into()));
        }
        MulticastInstance::new(graph, raw.root, terminals, raw.k)
    }
}

impl From<MulticastInstance> for InstanceJson {
    fn from(inst: MulticastInstance) -> Self {
        InstanceJson {
            directed: inst.graph.is_directed(),
            n: inst.graph.n(),
            edges: inst.graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
            root: inst.root,
            terminals: inst.terminals.into_iter().collect(),
            k: inst.k,
        }
    }
}

impl MulticastInstance {
    pub fn new(graph: Graph, root: Vertex, terminals: BTreeSet<Vertex>, k: usize) -> Result<Self> {
        if root >= graph.n() {
            return Err(Error::InvalidArgument(format!("root {root} out of range")));
        }
        if terminals.contains(&root) {
            return Err(Error::InvalidArgument("the root cannot be a terminal".into()));
        }
        if let Some(&s) = terminals.iter().find(|&&s| s >= graph.n()) {
            return Err(Error::InvalidArgument(format!("terminal {s} out of range")));
        }
        if k == 0 || k > terminals.len() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} must lie in 1..={}",
                terminals.len()
            )));
        }
        Ok(MulticastInstance {
            graph,
            root,
            terminals,
            k,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn terminals(&self) -> &BTreeSet<Vertex> {
        &self.terminals
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_directed(&self) -> bool {
        self.graph.is_directed()
    }

    /// Same graph and terminals with a different target.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        MulticastInstance::new(self.graph.clone(), self.root, self.terminals.clone(), k)
    }

    /// Root is vertex 0 and every terminal is a leaf hanging off exactly one
    /// vertex (in-degree 1 and out-degree 0 when directed, degree 1 otherwise).
    pub fn is_normalized(&self) -> bool {
        self.root == 0
            && self.terminals.iter().all(|&s| {
                if self.graph.is_directed() {
                    self.graph.in_degree(s) == 1 && self.graph.out_degree(s) == 0
                } else {
                    self.graph.out_degree(s) == 1
                }
            })
    }

    /// Terminals reachable from the root.
    pub fn reachable_terminals(&self) -> usize {
        let tree = bfs(self.graph.adjacency(), [self.root], None, None);
        self.terminals
            .iter()
            .filter(|&&s| tree.dist[s].is_some())
            .count()
    }

    /// Largest hop distance from the root to a vertex it reaches.
    pub fn root_eccentricity(&self) -> usize {
        let tree = bfs(self.graph.adjacency(), [self.root], None, None);
        tree.dist.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// Degree budget `B` and height budget `D` for one solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PoiseGuess {
    #[serde(rename = "B")]
    pub degree: usize,
    #[serde(rename = "D")]
    pub height: usize,
}

impl PoiseGuess {
    pub fn new(degree: usize, height: usize) -> Result<Self> {
        if degree == 0 || height == 0 {
            return Err(Error::InvalidArgument("B and D must both be at least 1".into()));
        }
        Ok(PoiseGuess { degree, height })
    }

    pub fn poise(&self) -> usize {
        self.degree + self.height
    }
}

/// Relabels the root to vertex 0 and hangs a fresh leaf `s'` off every
/// terminal `s`; the leaves become the terminal set and `k` is unchanged.
pub fn normalize_terminals(instance: &MulticastInstance) -> Result<MulticastInstance> {
    if instance.terminals.contains(&instance.root) {
        return Err(Error::InvalidArgument("the root cannot be a terminal".into()));
    }
    let root = instance.root;
    let swap = |v: Vertex| {
        if v == root {
            0
        } else if v == 0 {
            root
        } else {
            v
        }
    };
    let n = instance.graph.n();
    let mut edges: Vec<(Vertex, Vertex)> = instance
        .graph
        .edges()
        .iter()
        .map(|&(u, v)| (swap(u), swap(v)))
        .collect();
    let relabeled: BTreeSet<Vertex> = instance.terminals.iter().map(|&s| swap(s)).collect();
    let mut leaves = BTreeSet::new();
    for (i, &s) in relabeled.iter().enumerate() {
        edges.push((s, n + i));
        leaves.insert(n + i);
    }
    let graph = Graph::new(n + relabeled.len(), instance.graph.is_directed(), edges)?;
    MulticastInstance::new(graph, 0, leaves, instance.k)
}

/// Strips every edge touching a vertex farther than `radius` hops from the
/// root. Vertex ids are kept, so the far vertices remain as isolated ids;
/// terminals among them leave the terminal set.
pub fn prune_beyond(instance: &MulticastInstance, radius: usize) -> Result<MulticastInstance> {
    if radius == 0 {
        return Err(Error::InvalidArgument("radius must be at least 1".into()));
    }
    let tree = bfs(instance.graph.adjacency(), [instance.root], None, None);
    let far: Vec<bool> = tree.dist.iter().map(|d| d.is_none_or(|d| d > radius)).collect();
    let terminals: BTreeSet<Vertex> = instance
        .terminals
        .iter()
        .copied()
        .filter(|&s| !far[s])
        .collect();
    if terminals.len() < instance.k {
        return Err(Error::InfeasibleGuess(format!(
            "only {} terminals within {radius} hops, {} required",
            terminals.len(),
            instance.k
        )));
    }
    let graph = if far.iter().any(|&f| f) {
        instance.graph.without_incident(&far)
    } else {
        instance.graph.clone()
    };
    MulticastInstance::new(graph, instance.root, terminals, instance.k)
}

/// An instance together with the normalized form the solvers run on.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub original: MulticastInstance,
    pub normalized: MulticastInstance,
    transformed: bool,
}

impl NormalForm {
    /// Normalizes unless the instance already is.
    pub fn of(instance: &MulticastInstance) -> Result<Self> {
        if instance.is_normalized() {
            return Ok(NormalForm {
                original: instance.clone(),
                normalized: instance.clone(),
                transformed: false,
            });
        }
        Ok(NormalForm {
            original: instance.clone(),
            normalized: normalize_terminals(instance)?,
            transformed: true,
        })
    }

    pub fn transformed(&self) -> bool {
        self.transformed
    }

    /// Maps a tree on the normalized instance back to original ids, dropping
    /// the added terminal leaves.
    pub fn to_original(&self, tree: &PoiseTree) -> PoiseTree {
        if !self.transformed {
            return tree.clone();
        }
        let root = self.original.root;
        let n = self.original.graph.n();
        let swap = |v: Vertex| {
            if v == root {
                0
            } else if v == 0 {
                root
            } else {
                v
            }
        };
        let parent: BTreeMap<Vertex, Vertex> = tree
            .parent_map()
            .iter()
            .filter(|(&v, _)| v < n)
            .map(|(&v, &p)| (swap(v), swap(p)))
            .collect();
        PoiseTree::from_parts_unchecked(swap(tree.root()), parent)
    }
}
