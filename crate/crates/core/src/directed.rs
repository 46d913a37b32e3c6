//! Additive-approximation solver for directed instances.
//!
//! The vertex set is split into `A`, the root plus a few disjoint trees that
//! each reach `ρ` terminals cheaply, and `C`, where no vertex reaches `ρ`
//! terminals within the height budget. Either there are enough trees to
//! finish directly, or the remaining terminals are picked up from `C` by the
//! iterated matroid coverage of [`crate::cover`].

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cover::{default_max_iterations, pm_cover, singleton_locations, CoverSelection};
use crate::error::{Error, Result};
use crate::graph::{
    bfs, ceil_sqrt, mask_of, path_to, prune_beyond, shortest_path_tree, tree_metrics, BfsTree, Graph,
    MulticastInstance, PoiseGuess, PoiseTree, TreeMetrics, Vertex,
};

/// A tree inside `G[C]` of height at most `D` whose leaves are exactly `ρ` terminals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodTree {
    pub root_vertex: Vertex,
    /// `(parent, child)` arcs.
    pub edges: Vec<(Vertex, Vertex)>,
    pub terminals: BTreeSet<Vertex>,
    pub vertices: BTreeSet<Vertex>,
}

/// Output of [`greedy_packing`]: the trees found and the final split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packing {
    pub trees: Vec<GoodTree>,
    pub a_side: BTreeSet<Vertex>,
    pub c_side: BTreeSet<Vertex>,
}

/// `A` is the anchor plus at most `ρ` disjoint good trees, `C` the rest,
/// and `C` holds no `ρ`-good vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditivePartition {
    pub a_side: BTreeSet<Vertex>,
    pub c_side: BTreeSet<Vertex>,
    pub trees: Vec<GoodTree>,
    pub rho: usize,
}

impl AdditivePartition {
    /// `None` when the packing found more than `rho` trees.
    pub fn from_packing(packing: Packing, rho: usize) -> Option<Self> {
        (packing.trees.len() <= rho).then_some(AdditivePartition {
            a_side: packing.a_side,
            c_side: packing.c_side,
            trees: packing.trees,
            rho,
        })
    }

    /// Checks every structural property against `graph`.
    pub fn validate(&self, graph: &Graph, root: Vertex, terminals: &BTreeSet<Vertex>, radius: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::Consistency(m.to_string()));
        if !self.a_side.contains(&root) {
            return bad("root outside A");
        }
        if self.a_side.intersection(&self.c_side).next().is_some()
            || self.a_side.len() + self.c_side.len() != graph.n()
        {
            return bad("A and C do not partition the vertices");
        }
        if self.trees.len() > self.rho {
            return bad("more than rho trees");
        }
        let mut seen = BTreeSet::new();
        for t in &self.trees {
            if t.terminals.len() != self.rho || !t.vertices.is_subset(&self.a_side) {
                return bad("malformed good tree");
            }
            if !t.vertices.iter().all(|&v| seen.insert(v)) {
                return bad("good trees overlap");
            }
        }
        if !is_packing(graph, &self.c_side, terminals, self.rho, radius) {
            return bad("C contains a good vertex");
        }
        Ok(())
    }
}

fn coverage_bfs(graph: &Graph, in_c: &[bool], c: Vertex, radius: usize) -> BfsTree {
    bfs(graph.adjacency(), [c], Some(in_c), Some(radius))
}

/// Terminals reached by `tree`, nearest first and lowest id among equals.
fn reached_terminals<'a>(tree: &'a BfsTree, is_term: &'a [bool]) -> impl Iterator<Item = Vertex> + 'a {
    tree.order.iter().copied().filter(move |&v| is_term[v])
}

/// BFS tree of `c` inside `G[C]`, cut at depth `radius` and stripped of
/// branches without a terminal.
pub fn coverage_tree(
    graph: &Graph,
    c_side: &BTreeSet<Vertex>,
    terminals: &BTreeSet<Vertex>,
    c: Vertex,
    radius: usize,
) -> Result<PoiseTree> {
    if !c_side.contains(&c) {
        return Err(Error::InvalidArgument(format!("vertex {c} is not in C")));
    }
    let in_c = mask_of(graph.n(), c_side.iter().copied());
    Ok(coverage_tree_masked(graph, &in_c, terminals, c, radius))
}

pub(crate) fn coverage_tree_masked(
    graph: &Graph,
    in_c: &[bool],
    terminals: &BTreeSet<Vertex>,
    c: Vertex,
    radius: usize,
) -> PoiseTree {
    let tree = coverage_bfs(graph, in_c, c, radius);
    let parent: BTreeMap<Vertex, Vertex> = tree
        .order
        .iter()
        .filter_map(|&v| tree.parent[v].map(|p| (v, p)))
        .collect();
    PoiseTree::from_parts_unchecked(c, parent).prune(|v| terminals.contains(&v))
}

/// Number of terminals in the coverage tree of `c`, counting `c` itself.
fn coverage_count(graph: &Graph, in_c: &[bool], is_term: &[bool], c: Vertex, radius: usize) -> usize {
    reached_terminals(&coverage_bfs(graph, in_c, c, radius), is_term).count()
}

/// The coverage tree of `c` trimmed to its `rho` nearest terminals, if it has that many.
fn good_tree_at(
    graph: &Graph,
    in_c: &[bool],
    is_term: &[bool],
    c: Vertex,
    rho: usize,
    radius: usize,
) -> Option<GoodTree> {
    let tree = coverage_bfs(graph, in_c, c, radius);
    let kept: Vec<Vertex> = reached_terminals(&tree, is_term).take(rho).collect();
    if kept.len() < rho {
        return None;
    }
    let mut edges = BTreeSet::new();
    for &s in &kept {
        edges.extend(path_to(&tree, s));
    }
    let mut vertices = BTreeSet::from([c]);
    vertices.extend(edges.iter().map(|&(_, v)| v));
    Some(GoodTree {
        root_vertex: c,
        edges: edges.into_iter().collect(),
        terminals: kept.into_iter().collect(),
        vertices,
    })
}

/// Whether no vertex of `C` reaches `rho` terminals within `radius` in `G[C]`.
pub fn is_packing(graph: &Graph, c_side: &BTreeSet<Vertex>, terminals: &BTreeSet<Vertex>, rho: usize, radius: usize) -> bool {
    let in_c = mask_of(graph.n(), c_side.iter().copied());
    let is_term = mask_of(graph.n(), terminals.iter().copied());
    c_side
        .iter()
        .all(|&c| coverage_count(graph, &in_c, &is_term, c, radius) < rho)
}

/// Extracts `rho`-good trees from `start_c` until what remains is a packing.
///
/// Vertices are examined in ascending order. Removing vertices from `C`
/// never makes another vertex good, so one pass gives the same result as
/// rescanning from the smallest id after every extraction.
pub fn greedy_packing(
    graph: &Graph,
    start_c: &BTreeSet<Vertex>,
    terminals: &BTreeSet<Vertex>,
    rho: usize,
    radius: usize,
) -> Result<Packing> {
    if rho == 0 {
        return Err(Error::InvalidArgument("rho must be at least 1".into()));
    }
    let n = graph.n();
    let mut in_c = mask_of(n, start_c.iter().copied().filter(|&v| v < n));
    let is_term = mask_of(n, terminals.iter().copied().filter(|&v| v < n));
    let mut trees = Vec::new();
    for &c in start_c {
        if !in_c[c] {
            continue;
        }
        if let Some(tree) = good_tree_at(graph, &in_c, &is_term, c, rho, radius) {
            for &v in &tree.vertices {
                in_c[v] = false;
            }
            trees.push(tree);
        }
    }
    let c_side: BTreeSet<Vertex> = (0..n).filter(|&v| in_c[v]).collect();
    let a_side = (0..n).filter(|&v| !in_c[v]).collect();
    Ok(Packing { trees, a_side, c_side })
}

/// Joins the first `rho` trees to the root along shortest paths.
pub fn solve_many_trees(graph: &Graph, root: Vertex, trees: &[GoodTree], rho: usize) -> Result<PoiseTree> {
    if trees.len() < rho {
        return Err(Error::InvalidArgument(format!("{} trees, {rho} needed", trees.len())));
    }
    let chosen = &trees[..rho];
    let reach = bfs(graph.adjacency(), [root], None, None);
    let mut h = BTreeSet::new();
    let mut keep = BTreeSet::new();
    for t in chosen {
        if reach.dist[t.root_vertex].is_none() {
            return Err(Error::InfeasibleGuess(format!(
                "tree root {} unreachable from the root",
                t.root_vertex
            )));
        }
        h.extend(path_to(&reach, t.root_vertex));
        h.extend(t.edges.iter().copied());
        keep.extend(t.terminals.iter().copied());
    }
    let h: Vec<_> = h.into_iter().collect();
    Ok(shortest_path_tree(graph, &h, root)?.prune(|v| keep.contains(&v)))
}

/// Result of [`complete`], with the pieces kept for inspection.
#[derive(Debug, Clone)]
pub struct Completion {
    pub tree: PoiseTree,
    pub cover: Option<CoverSelection>,
    /// Arcs of the forest inside `G[C]` hanging below the chosen pairs.
    pub forest: Vec<(Vertex, Vertex)>,
}

/// Finishes an additive partition: the root reaches every good tree, and
/// `k_remaining` further terminals of `C` are covered through pairs `(a, c)`.
pub fn complete(
    graph: &Graph,
    partition: &AdditivePartition,
    root: Vertex,
    terminals: &BTreeSet<Vertex>,
    k_remaining: usize,
    guess: PoiseGuess,
) -> Result<Completion> {
    let input = CompletionInput {
        anchor: &BTreeSet::from([root]),
        base_edges: &[],
        root,
        active: terminals,
        keep: terminals,
        k_remaining,
        guess,
        max_iterations: default_max_iterations(k_remaining),
    };
    complete_anchored(graph, partition, &input)
}

pub(crate) struct CompletionInput<'a> {
    /// Vertices already connected to the root; the good trees hang off them.
    pub anchor: &'a BTreeSet<Vertex>,
    pub base_edges: &'a [(Vertex, Vertex)],
    pub root: Vertex,
    /// Terminals still to be collected.
    pub active: &'a BTreeSet<Vertex>,
    /// Terminals the output tree is pruned to.
    pub keep: &'a BTreeSet<Vertex>,
    pub k_remaining: usize,
    pub guess: PoiseGuess,
    pub max_iterations: usize,
}

pub(crate) fn complete_anchored(graph: &Graph, partition: &AdditivePartition, input: &CompletionInput) -> Result<Completion> {
    let n = graph.n();
    let reach = bfs(graph.adjacency(), input.anchor.iter().copied(), None, None);
    let mut h: BTreeSet<(Vertex, Vertex)> = input.base_edges.iter().copied().collect();
    for t in &partition.trees {
        if reach.dist[t.root_vertex].is_none() {
            return Err(Error::InfeasibleGuess(format!(
                "tree root {} unreachable from the root",
                t.root_vertex
            )));
        }
        h.extend(path_to(&reach, t.root_vertex));
        h.extend(t.edges.iter().copied());
    }
    let mut cover = None;
    let mut forest = Vec::new();
    if input.k_remaining > 0 {
        let elements: BTreeSet<Vertex> = input.active.intersection(&partition.c_side).copied().collect();
        let sel = pm_cover(
            graph,
            input.root,
            &partition.a_side,
            &partition.c_side,
            &elements,
            &singleton_locations(&elements),
            input.k_remaining,
            input.guess.degree,
            input.guess.height,
            input.max_iterations.max(1),
        )
        .map_err(|e| match e {
            Error::CoverStalled { covered, target, .. } => Error::InfeasibleGuess(format!(
                "coverage stalled at {covered} of {target} remaining terminals"
            )),
            other => other,
        })?;
        if sel.covered_elements.len() < input.k_remaining {
            return Err(Error::InfeasibleGuess(format!(
                "covered {} of {} remaining terminals",
                sel.covered_elements.len(),
                input.k_remaining
            )));
        }
        forest = cover_forest(graph, &partition.c_side, &sel, &elements, input.guess.height);
        h.extend(sel.arcs.iter().copied());
        h.extend(forest.iter().copied());
        cover = Some(sel);
    }
    debug_assert!(h.iter().all(|&(u, v)| u < n && v < n));
    let h: Vec<_> = h.into_iter().collect();
    let tree = shortest_path_tree(graph, &h, input.root)?.prune(|v| input.keep.contains(&v));
    Ok(Completion { tree, cover, forest })
}

/// Shortest-path forest below the chosen `c` vertices over their coverage
/// trees, built from a virtual root with an arc to every chosen `c` and
/// pruned to branches that reach a terminal.
fn cover_forest(
    graph: &Graph,
    c_side: &BTreeSet<Vertex>,
    sel: &CoverSelection,
    terminals: &BTreeSet<Vertex>,
    radius: usize,
) -> Vec<(Vertex, Vertex)> {
    let n = graph.n();
    let virtual_root = n;
    let in_c = mask_of(n, c_side.iter().copied());
    let starts: BTreeSet<Vertex> = sel.arcs.iter().map(|&(_, c)| c).collect();
    let mut adj = vec![Vec::new(); n + 1];
    for &c in &starts {
        adj[virtual_root].push(c);
        for (u, v) in coverage_tree_masked(graph, &in_c, terminals, c, radius).arcs() {
            adj[u].push(v);
            if !graph.is_directed() {
                adj[v].push(u);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let tree = bfs(&adj, [virtual_root], None, None);
    let parent: BTreeMap<Vertex, Vertex> =
        tree.order.iter().filter_map(|&v| tree.parent[v].map(|p| (v, p))).collect();
    PoiseTree::from_parts_unchecked(virtual_root, parent)
        .prune(|v| terminals.contains(&v))
        .arcs()
        .into_iter()
        .filter(|&(p, _)| p != virtual_root)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectedBranch {
    ManyTrees,
    Complete,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectedTrace {
    pub guess: PoiseGuess,
    pub branch: DirectedBranch,
    pub rho: usize,
    pub good_trees: usize,
    pub terminals_in_a: usize,
    pub k_remaining: usize,
    pub cover: Option<CoverSelection>,
    pub metrics: TreeMetrics,
}

#[derive(Debug, Clone)]
pub struct DirectedSolution {
    pub tree: PoiseTree,
    pub trace: DirectedTrace,
    /// Arcs of the completion forest inside `C`, empty on the many-trees branch.
    pub forest: Vec<(Vertex, Vertex)>,
    pub partition: Packing,
}

/// Runs the directed algorithm for one `(B, D)` guess with `ρ = ⌈√k⌉`.
///
/// Returns [`Error::InfeasibleGuess`] when the guess is too small for this
/// instance.
pub fn solve_directed(instance: &MulticastInstance, guess: PoiseGuess) -> Result<DirectedSolution> {
    solve_directed_with_rho(instance, guess, ceil_sqrt(instance.k()))
}

/// Same as [`solve_directed`] with a caller-chosen `rho`.
pub fn solve_directed_with_rho(instance: &MulticastInstance, guess: PoiseGuess, rho: usize) -> Result<DirectedSolution> {
    if !instance.is_directed() {
        return Err(Error::InvalidArgument("instance is undirected".into()));
    }
    let pruned = prune_beyond(instance, guess.height)?;
    let graph = pruned.graph();
    let root = pruned.root();
    let terminals = pruned.terminals();
    let k = pruned.k();
    let start_c: BTreeSet<Vertex> = (0..graph.n()).filter(|&v| v != root).collect();
    let packing = greedy_packing(graph, &start_c, terminals, rho, guess.height)?;
    let terminals_in_a = terminals.intersection(&packing.a_side).count();
    let (branch, tree, cover, forest, k_remaining) = if packing.trees.len() >= rho {
        let tree = solve_many_trees(graph, root, &packing.trees, rho)?;
        (DirectedBranch::ManyTrees, tree, None, Vec::new(), 0)
    } else {
        let k_remaining = k.saturating_sub(terminals_in_a);
        let partition = AdditivePartition::from_packing(packing.clone(), rho).expect("fewer than rho trees");
        let done = complete(graph, &partition, root, terminals, k_remaining, guess)?;
        (DirectedBranch::Complete, done.tree, done.cover, done.forest, k_remaining)
    };
    let metrics = tree_metrics(&tree, instance)?;
    if metrics.terminals_covered < k {
        return Err(Error::InfeasibleGuess(format!(
            "tree reaches {} of {k} terminals",
            metrics.terminals_covered
        )));
    }
    Ok(DirectedSolution {
        tree,
        trace: DirectedTrace {
            guess,
            branch,
            rho,
            good_trees: packing.trees.len(),
            terminals_in_a,
            k_remaining,
            cover,
            metrics,
        },
        forest,
        partition: packing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    fn two_hubs() -> Graph {
        Graph::new(7, true, vec![(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]).unwrap()
    }

    #[test]
    fn coverage_tree_single_arc() {
        let g = Graph::new(4, true, vec![(1, 3), (0, 1)]).unwrap();
        let t = coverage_tree(&g, &set(&[1, 3]), &set(&[3]), 1, 2).unwrap();
        assert_eq!(t.arcs(), vec![(1, 3)]);
    }

    #[test]
    fn coverage_tree_without_terminals_is_a_point() {
        let g = Graph::new(4, true, vec![(1, 2), (2, 3)]).unwrap();
        let t = coverage_tree(&g, &set(&[1, 2, 3]), &set(&[3]), 1, 1).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn packing_two_hubs() {
        let g = two_hubs();
        let p = greedy_packing(&g, &set(&[1, 2, 3, 4, 5, 6]), &set(&[3, 4, 5, 6]), 2, 2).unwrap();
        let roots: Vec<_> = p.trees.iter().map(|t| t.root_vertex).collect();
        assert_eq!(roots, [1, 2]);
        assert!(is_packing(&g, &p.c_side, &set(&[3, 4, 5, 6]), 2, 2));
        assert_eq!(p.a_side, set(&[0, 1, 2, 3, 4, 5, 6]));
    }

    #[test]
    fn packing_with_rho_above_terminal_count() {
        let g = two_hubs();
        let start = set(&[1, 2, 3, 4, 5, 6]);
        let p = greedy_packing(&g, &start, &set(&[3, 4]), 3, 2).unwrap();
        assert!(p.trees.is_empty());
        assert_eq!(p.c_side, start);
    }

    #[test]
    fn trim_keeps_the_nearest_lowest_ids() {
        let g = Graph::new(5, true, vec![(0, 1), (1, 2), (1, 3), (1, 4)]).unwrap();
        let p = greedy_packing(&g, &set(&[1, 2, 3, 4]), &set(&[2, 3, 4]), 2, 2).unwrap();
        assert_eq!(p.trees.len(), 1);
        assert_eq!(p.trees[0].terminals, set(&[2, 3]));
        assert!(p.c_side.contains(&4));
    }

    #[test]
    fn many_trees_on_three_hubs() {
        let g = Graph::new(
            10,
            true,
            vec![(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 6), (2, 7), (3, 8), (3, 9)],
        )
        .unwrap();
        let term = set(&[4, 5, 6, 7, 8, 9]);
        let p = greedy_packing(&g, &(1..10).collect(), &term, 2, 2).unwrap();
        let t = solve_many_trees(&g, 0, &p.trees, 2).unwrap();
        assert_eq!(t.out_degree(0), 2);
        assert_eq!(t.height(), 2);
        assert_eq!(term.iter().filter(|&&s| t.contains(s)).count(), 4);
    }

    fn two_branch() -> MulticastInstance {
        let g = Graph::new(5, true, vec![(0, 1), (0, 2), (1, 3), (2, 4)]).unwrap();
        MulticastInstance::new(g, 0, set(&[3, 4]), 2).unwrap()
    }

    #[test]
    fn complete_on_two_branches() {
        let inst = two_branch();
        let sol = solve_directed(&inst, PoiseGuess::new(2, 2).unwrap()).unwrap();
        assert_eq!(sol.trace.branch, DirectedBranch::Complete);
        assert_eq!(sol.trace.good_trees, 0);
        assert_eq!(sol.tree.arcs(), vec![(0, 1), (0, 2), (1, 3), (2, 4)]);
        assert_eq!((sol.trace.metrics.max_out_degree, sol.trace.metrics.height), (2, 2));
    }

    #[test]
    fn complete_with_nothing_left_keeps_a_only() {
        let g = two_hubs();
        let term = set(&[3, 4]);
        let p = greedy_packing(&g, &(1..7).collect(), &term, 2, 2).unwrap();
        let part = AdditivePartition::from_packing(p, 2).unwrap();
        part.validate(&g, 0, &term, 2).unwrap();
        let done = complete(&g, &part, 0, &term, 0, PoiseGuess::new(1, 2).unwrap()).unwrap();
        assert!(done.cover.is_none());
        assert!(done.tree.height() <= 4);
        assert!(done.tree.contains(3) && done.tree.contains(4));
    }

    #[test]
    fn star_of_stars_takes_many_trees() {
        let mut edges = vec![];
        for hub in 1..=3 {
            edges.push((0, hub));
            edges.push((hub, 2 + 2 * hub));
            edges.push((hub, 3 + 2 * hub));
        }
        let g = Graph::new(10, true, edges).unwrap();
        let inst = MulticastInstance::new(g, 0, (4..10).collect(), 4).unwrap();
        let sol = solve_directed(&inst, PoiseGuess::new(2, 2).unwrap()).unwrap();
        assert_eq!(sol.trace.branch, DirectedBranch::ManyTrees);
        let m = sol.trace.metrics;
        assert!(m.terminals_covered >= 4 && m.max_out_degree <= 4 && m.height <= 4);
    }

    #[test]
    fn single_arc_instance() {
        let g = Graph::new(2, true, vec![(0, 1)]).unwrap();
        let inst = MulticastInstance::new(g, 0, set(&[1]), 1).unwrap();
        let sol = solve_directed(&inst, PoiseGuess::new(1, 1).unwrap()).unwrap();
        assert_eq!(sol.tree.arcs(), vec![(0, 1)]);
        assert_eq!(sol.trace.metrics.poise, 2);
    }

    #[test]
    fn too_short_height_is_infeasible() {
        let inst = two_branch();
        let err = solve_directed(&inst, PoiseGuess::new(2, 1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleGuess(_)));
    }

    #[test]
    fn too_small_degree_is_infeasible() {
        // four terminals behind four middles, one degree unit per round
        let mut edges = vec![];
        for m in 1..=4 {
            edges.push((0, m));
            edges.push((m, m + 4));
        }
        let g = Graph::new(9, true, edges).unwrap();
        let inst = MulticastInstance::new(g, 0, (5..9).collect(), 4).unwrap();
        let err = solve_directed_with_rho(&inst, PoiseGuess::new(1, 2).unwrap(), 5).unwrap_err();
        assert!(matches!(err, Error::InfeasibleGuess(_)));
    }
}
