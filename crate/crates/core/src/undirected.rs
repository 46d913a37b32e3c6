//! Multiplicative-approximation solver for undirected instances.
//!
//! A growing region `R` around the root is kept connected at all times.
//! Each round either finishes with the additive completion, or bundles
//! small trees of `ρ = ⌈t^{1/3}⌉` terminals into super-terminals and pulls
//! a batch of them into `R`, through one large tree or through matroid
//! coverage from `R`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cover::{build_coverage_instance, pm_cover_system, CoverSelection, PartitionMatroid};
use crate::directed::{complete_anchored, greedy_packing, AdditivePartition, CompletionInput, GoodTree};
use crate::error::{Error, Result};
use crate::graph::{
    bfs, ceil_cbrt, ceil_log2, mask_of, path_to, prune_beyond, shortest_path_tree, tree_metrics, Graph,
    MulticastInstance, PoiseGuess, PoiseTree, TreeMetrics, Vertex,
};

/// A small tree treated as one coverable element. Every vertex of the tree
/// represents it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuperTerminal {
    pub id: usize,
    pub tree: GoodTree,
    pub representatives: BTreeSet<Vertex>,
}

impl SuperTerminal {
    fn new(id: usize, tree: GoodTree) -> Self {
        SuperTerminal {
            id,
            representatives: tree.vertices.clone(),
            tree,
        }
    }
}

/// The region already joined to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveredRegion {
    pub root: Vertex,
    pub vertices: BTreeSet<Vertex>,
    /// Every edge added so far, in the orientation it was added.
    pub edges: Vec<(Vertex, Vertex)>,
}

impl CoveredRegion {
    pub fn new(root: Vertex) -> Self {
        CoveredRegion {
            root,
            vertices: BTreeSet::from([root]),
            edges: Vec::new(),
        }
    }

    fn absorb(&mut self, edges: impl IntoIterator<Item = (Vertex, Vertex)>) {
        for (u, v) in edges {
            self.vertices.insert(u);
            self.vertices.insert(v);
            self.edges.push((u, v));
        }
    }

    fn outside(&self, n: usize) -> BTreeSet<Vertex> {
        (0..n).filter(|v| !self.vertices.contains(v)).collect()
    }
}

#[derive(Debug, Clone)]
pub enum SmallOutcome {
    /// The packing was additive and the completion reached the target.
    Completed(PoiseTree),
    /// At least `ρ` small trees, in discovery order.
    Trees(Vec<GoodTree>),
}

/// Packs `ρ`-terminal trees outside the region and finishes with the
/// additive completion when fewer than `ρ` of them exist.
///
/// `active` are the terminals not yet discarded; `keep` are all terminals
/// the output tree may end at.
#[allow(clippy::too_many_arguments)]
pub fn small(
    graph: &Graph,
    region: &CoveredRegion,
    active: &BTreeSet<Vertex>,
    keep: &BTreeSet<Vertex>,
    rho: usize,
    k_remaining: usize,
    guess: PoiseGuess,
) -> Result<SmallOutcome> {
    let c_side = region.outside(graph.n());
    let terms: BTreeSet<Vertex> = active.intersection(&c_side).copied().collect();
    let packing = greedy_packing(graph, &c_side, &terms, rho, guess.height)?;
    if packing.trees.len() >= rho {
        return Ok(SmallOutcome::Trees(packing.trees));
    }
    let in_trees: usize = packing.trees.iter().map(|t| t.terminals.len()).sum();
    let k_rest = k_remaining.saturating_sub(in_trees);
    let partition = AdditivePartition::from_packing(packing, rho).expect("fewer than rho trees");
    let input = CompletionInput {
        anchor: &region.vertices,
        base_edges: &region.edges,
        root: region.root,
        active: &terms,
        keep,
        k_remaining: k_rest,
        guess,
        max_iterations: crate::cover::default_max_iterations(k_rest),
    };
    Ok(SmallOutcome::Completed(complete_anchored(graph, &partition, &input)?.tree))
}

/// A vertex reaching many super-terminals and the tree joining them.
#[derive(Debug, Clone)]
pub struct LargeTree {
    pub vertex: Vertex,
    pub tree: PoiseTree,
    /// Indices into the super-terminal list, nearest first.
    pub supers: Vec<usize>,
}

/// First vertex of `C` (ascending) within `radius` of at least `threshold`
/// super-terminals in `G[C]`, with the union of shortest paths to the first
/// `threshold` of them and their small trees.
pub fn find_good_vertex_wrt_super(
    graph: &Graph,
    c_side: &BTreeSet<Vertex>,
    supers: &[SuperTerminal],
    threshold: usize,
    radius: usize,
) -> Option<LargeTree> {
    if threshold == 0 || threshold > supers.len() {
        return None;
    }
    let n = graph.n();
    let in_c = mask_of(n, c_side.iter().copied());
    let mut owner = vec![None; n];
    for (i, s) in supers.iter().enumerate() {
        for &v in &s.representatives {
            owner[v] = Some(i);
        }
    }
    for &v in c_side {
        let tree = bfs(graph.adjacency(), [v], Some(&in_c), Some(radius));
        let mut hits: Vec<(usize, Vertex)> = Vec::new();
        for &w in &tree.order {
            if let Some(i) = owner[w] {
                if !hits.iter().any(|&(j, _)| j == i) {
                    hits.push((i, w));
                    if hits.len() == threshold {
                        break;
                    }
                }
            }
        }
        if hits.len() < threshold {
            continue;
        }
        let mut edges = BTreeSet::new();
        for &(i, w) in &hits {
            edges.extend(path_to(&tree, w));
            edges.extend(supers[i].tree.edges.iter().copied());
        }
        let edges: Vec<_> = edges.into_iter().collect();
        let q = shortest_path_tree(graph, &edges, v).expect("edges come from the graph");
        return Some(LargeTree {
            vertex: v,
            tree: q,
            supers: hits.into_iter().map(|(i, _)| i).collect(),
        });
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationBranch {
    Small,
    Large,
    Pmcover,
}

/// One round of [`solve_undirected`].
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub branch: IterationBranch,
    /// Super-terminals formed this round.
    pub supers: usize,
    /// Terminals that joined the region.
    pub covered: usize,
    /// Terminals dropped from further consideration.
    pub discarded: usize,
    /// Largest number of child arcs, among those first added this round,
    /// at a vertex that was in the region before the round.
    #[serde(rename = "max_degree_delta_R")]
    pub max_degree_delta_r: usize,
    /// Same, at vertices that were outside the region.
    #[serde(rename = "max_degree_delta_C")]
    pub max_degree_delta_c: usize,
    #[serde(skip)]
    pub k_remaining_before: usize,
    #[serde(skip)]
    pub region_before: BTreeSet<Vertex>,
    #[serde(skip)]
    pub added_edges: Vec<(Vertex, Vertex)>,
    /// Terminal sets of the super-terminals, by index.
    #[serde(skip)]
    pub super_terminals: Vec<BTreeSet<Vertex>>,
    #[serde(skip)]
    pub covered_supers: Vec<usize>,
    #[serde(skip)]
    pub cover: Option<CoverSelection>,
    #[serde(skip)]
    pub large_vertex: Option<Vertex>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UndirectedTrace {
    pub guess: PoiseGuess,
    pub rho: usize,
    pub t: usize,
    /// The completion is anchored at the whole region, not the root alone.
    pub anchor: &'static str,
    pub iterations: Vec<IterationRecord>,
    pub metrics: TreeMetrics,
}

#[derive(Debug, Clone)]
pub struct UndirectedSolution {
    pub tree: PoiseTree,
    pub trace: UndirectedTrace,
}

fn edge_key(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    (u.min(v), u.max(v))
}

/// Runs the undirected algorithm for one `(B, D)` guess.
///
/// `ρ` is fixed from the instance's terminal count before pruning.
pub fn solve_undirected(instance: &MulticastInstance, guess: PoiseGuess) -> Result<UndirectedSolution> {
    if instance.is_directed() {
        return Err(Error::InvalidArgument("instance is directed".into()));
    }
    let t = instance.terminals().len();
    let rho = ceil_cbrt(t).max(1);
    let pruned = prune_beyond(instance, guess.height)?;
    let graph = pruned.graph();
    let n = graph.n();
    let root = pruned.root();
    let all_terms = pruned.terminals().clone();
    let k = pruned.k();
    let mut active = all_terms.clone();
    let mut region = CoveredRegion::new(root);
    let mut log: Vec<IterationRecord> = Vec::new();
    let mut finished: Option<PoiseTree> = None;
    let covered_in = |vs: &BTreeSet<Vertex>| all_terms.intersection(vs).count();

    loop {
        let covered_before = covered_in(&region.vertices);
        let k_rem = k.saturating_sub(covered_before);
        if k_rem == 0 {
            break;
        }
        if active.iter().all(|s| region.vertices.contains(s)) {
            return Err(Error::InfeasibleGuess(format!(
                "terminals exhausted with {k_rem} still required"
            )));
        }
        let mut rec = IterationRecord {
            iter: log.len() + 1,
            branch: IterationBranch::Small,
            supers: 0,
            covered: 0,
            discarded: 0,
            max_degree_delta_r: 0,
            max_degree_delta_c: 0,
            k_remaining_before: k_rem,
            region_before: region.vertices.clone(),
            added_edges: Vec::new(),
            super_terminals: Vec::new(),
            covered_supers: Vec::new(),
            cover: None,
            large_vertex: None,
        };
        let trees = match small(graph, &region, &active, &all_terms, rho, k_rem, guess)? {
            SmallOutcome::Completed(tree) => {
                let known: BTreeSet<_> = region.edges.iter().map(|&(u, v)| edge_key(u, v)).collect();
                rec.added_edges = tree.arcs().into_iter().filter(|&(u, v)| !known.contains(&edge_key(u, v))).collect();
                rec.covered = all_terms.iter().filter(|&&s| tree.contains(s)).count() - covered_before;
                log.push(rec);
                finished = Some(tree);
                break;
            }
            SmallOutcome::Trees(trees) => trees,
        };
        let supers: Vec<SuperTerminal> = trees.into_iter().enumerate().map(|(i, t)| SuperTerminal::new(i, t)).collect();
        rec.supers = supers.len();
        rec.super_terminals = supers.iter().map(|s| s.tree.terminals.clone()).collect();
        let c_side = region.outside(n);
        let before_active = active.len();
        if let Some(large) = find_good_vertex_wrt_super(graph, &c_side, &supers, rho, guess.height) {
            rec.branch = IterationBranch::Large;
            rec.large_vertex = Some(large.vertex);
            let reach = bfs(graph.adjacency(), region.vertices.iter().copied(), None, None);
            let mut added = path_to(&reach, large.vertex);
            added.extend(large.tree.arcs());
            for s in large.tree.vertices() {
                active.remove(&s);
            }
            rec.covered_supers = large.supers;
            rec.added_edges = added.clone();
            region.absorb(added);
        } else {
            rec.branch = IterationBranch::Pmcover;
            let elements: BTreeSet<usize> = (0..supers.len()).collect();
            let locations: BTreeMap<usize, BTreeSet<Vertex>> =
                supers.iter().map(|s| (s.id, s.representatives.clone())).collect();
            let system = build_coverage_instance(
                graph,
                root,
                &region.vertices,
                &c_side,
                &elements,
                &locations,
                guess.height,
            )?;
            let matroid = PartitionMatroid::by_anchor(&system, guess.degree);
            let wanted = k_rem.div_ceil(rho);
            let iterations = ceil_log2(supers.len().min(wanted).max(1)) + 1;
            let (sel, _) = pm_cover_system(&system, &matroid, supers.len(), iterations);
            let forest = super_forest(graph, &c_side, &supers, &sel, guess.height);
            let mut added = sel.arcs.clone();
            added.extend(forest);
            for s in &supers {
                for t in &s.tree.terminals {
                    active.remove(t);
                }
            }
            rec.covered_supers = sel.covered_elements.iter().copied().collect();
            rec.cover = Some(sel);
            rec.added_edges = added.clone();
            region.absorb(added);
        }
        rec.discarded = before_active - active.len();
        rec.covered = covered_in(&region.vertices) - covered_before;
        log.push(rec);
    }

    let tree = match finished {
        Some(t) => t,
        None => shortest_path_tree(graph, &region.edges, root)?.prune(|v| all_terms.contains(&v)),
    };
    record_degree_deltas(&tree, &mut log);
    let metrics = tree_metrics(&tree, instance)?;
    if metrics.terminals_covered < k {
        return Err(Error::InfeasibleGuess(format!(
            "tree reaches {} of {k} terminals",
            metrics.terminals_covered
        )));
    }
    Ok(UndirectedSolution {
        tree,
        trace: UndirectedTrace {
            guess,
            rho,
            t,
            anchor: "region",
            iterations: log,
            metrics,
        },
    })
}

/// Forest below the chosen pairs reaching each covered super-terminal's
/// nearest representative, together with those small trees, taken as a
/// shortest-path forest from a virtual root and pruned to their terminals.
fn super_forest(
    graph: &Graph,
    c_side: &BTreeSet<Vertex>,
    supers: &[SuperTerminal],
    sel: &CoverSelection,
    radius: usize,
) -> Vec<(Vertex, Vertex)> {
    let n = graph.n();
    let virtual_root = n;
    let in_c = mask_of(n, c_side.iter().copied());
    let mut owner = vec![None; n];
    for (i, s) in supers.iter().enumerate() {
        if sel.covered_elements.contains(&i) {
            for &v in &s.representatives {
                owner[v] = Some(i);
            }
        }
    }
    let mut adj = vec![Vec::new(); n + 1];
    let link = |adj: &mut Vec<Vec<Vertex>>, u: Vertex, v: Vertex| {
        adj[u].push(v);
        adj[v].push(u);
    };
    let starts: BTreeSet<Vertex> = sel.arcs.iter().map(|&(_, c)| c).collect();
    for &c in &starts {
        adj[virtual_root].push(c);
        let tree = bfs(graph.adjacency(), [c], Some(&in_c), Some(radius));
        let mut seen = BTreeSet::new();
        for &w in &tree.order {
            if let Some(i) = owner[w] {
                if seen.insert(i) {
                    for (u, v) in path_to(&tree, w) {
                        link(&mut adj, u, v);
                    }
                }
            }
        }
    }
    let mut keep = BTreeSet::new();
    for &i in &sel.covered_elements {
        for &(u, v) in &supers[i].tree.edges {
            link(&mut adj, u, v);
        }
        keep.extend(supers[i].tree.terminals.iter().copied());
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let tree = bfs(&adj, [virtual_root], None, None);
    let parent: BTreeMap<Vertex, Vertex> =
        tree.order.iter().filter_map(|&v| tree.parent[v].map(|p| (v, p))).collect();
    PoiseTree::from_parts_unchecked(virtual_root, parent)
        .prune(|v| keep.contains(&v))
        .arcs()
        .into_iter()
        .filter(|&(p, _)| p != virtual_root)
        .collect()
}

/// Charges every arc of the final tree to its parent endpoint and to the
/// round in which its edge first appeared.
fn record_degree_deltas(tree: &PoiseTree, log: &mut [IterationRecord]) {
    let mut first_seen: BTreeMap<(Vertex, Vertex), usize> = BTreeMap::new();
    for (i, rec) in log.iter().enumerate() {
        for &(u, v) in &rec.added_edges {
            first_seen.entry(edge_key(u, v)).or_insert(i);
        }
    }
    let mut charge: Vec<BTreeMap<Vertex, usize>> = vec![BTreeMap::new(); log.len()];
    for (p, c) in tree.arcs() {
        if let Some(&i) = first_seen.get(&edge_key(p, c)) {
            *charge[i].entry(p).or_default() += 1;
        }
    }
    for (rec, counts) in log.iter_mut().zip(charge) {
        for (v, d) in counts {
            if rec.region_before.contains(&v) {
                rec.max_degree_delta_r = rec.max_degree_delta_r.max(d);
            } else {
                rec.max_degree_delta_c = rec.max_degree_delta_c.max(d);
            }
        }
    }
}
