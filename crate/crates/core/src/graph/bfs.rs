use std::collections::{BTreeMap, BTreeSet};

use super::{Graph, PoiseTree, Vertex};
use crate::error::{Error, Result};

/// Level-synchronous BFS result. `parent[v]` is the lowest-id vertex of the
/// previous level with an arc into `v`.
#[derive(Debug, Clone)]
pub(crate) struct BfsTree {
    pub dist: Vec<Option<usize>>,
    pub parent: Vec<Option<Vertex>>,
    /// Vertices in visiting order: by level, ascending id within a level.
    pub order: Vec<Vertex>,
}

/// Multi-source BFS over `adj`, staying inside `allowed` and stopping at
/// `max_depth` when given.
pub(crate) fn bfs(
    adj: &[Vec<Vertex>],
    sources: impl IntoIterator<Item = Vertex>,
    allowed: Option<&[bool]>,
    max_depth: Option<usize>,
) -> BfsTree {
    let n = adj.len();
    let mut dist = vec![None; n];
    let mut parent = vec![None; n];
    let mut level: Vec<Vertex> = sources
        .into_iter()
        .filter(|&s| allowed.is_none_or(|m| m[s]))
        .collect();
    level.sort_unstable();
    level.dedup();
    for &s in &level {
        dist[s] = Some(0);
    }
    let mut order = level.clone();
    let mut depth = 0;
    while !level.is_empty() && max_depth.is_none_or(|d| depth < d) {
        let mut next = Vec::new();
        for &u in &level {
            for &v in &adj[u] {
                if dist[v].is_none() && allowed.is_none_or(|m| m[v]) {
                    dist[v] = Some(depth + 1);
                    parent[v] = Some(u);
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        order.extend_from_slice(&next);
        level = next;
        depth += 1;
    }
    BfsTree {
        dist,
        parent,
        order,
    }
}

/// Arcs of the BFS path ending at `v`, listed from its source outwards.
pub(crate) fn path_to(tree: &BfsTree, v: Vertex) -> Vec<(Vertex, Vertex)> {
    let mut arcs = Vec::new();
    let mut cur = v;
    while let Some(p) = tree.parent[cur] {
        arcs.push((p, cur));
        cur = p;
    }
    arcs.reverse();
    arcs
}

/// Hop distances from `sources` inside the subgraph induced by `restriction`.
/// Unreachable vertices are absent from the result.
pub fn bfs_distances(
    graph: &Graph,
    sources: &BTreeSet<Vertex>,
    restriction: Option<&BTreeSet<Vertex>>,
) -> Result<BTreeMap<Vertex, usize>> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument("bfs needs at least one source".into()));
    }
    if let Some(&bad) = sources.iter().find(|&&s| s >= graph.n()) {
        return Err(Error::InvalidArgument(format!("source {bad} out of range")));
    }
    let mask = match restriction {
        Some(r) => {
            if let Some(&s) = sources.iter().find(|s| !r.contains(s)) {
                return Err(Error::InvalidArgument(format!(
                    "source {s} lies outside the restriction"
                )));
            }
            Some(super::mask_of(graph.n(), r.iter().copied().filter(|&v| v < graph.n())))
        }
        None => None,
    };
    let tree = bfs(graph.adjacency(), sources.iter().copied(), mask.as_deref(), None);
    Ok(tree
        .dist
        .iter()
        .enumerate()
        .filter_map(|(v, d)| d.map(|d| (v, d)))
        .collect())
}

/// BFS tree rooted at `root` over the subgraph formed by `edge_subset`.
///
/// Edges of an undirected graph are traversed both ways; arcs of a directed
/// graph only forwards. Vertices not reachable from `root` are left out.
pub fn shortest_path_tree(
    graph: &Graph,
    edge_subset: &[(Vertex, Vertex)],
    root: Vertex,
) -> Result<PoiseTree> {
    if root >= graph.n() {
        return Err(Error::InvalidArgument(format!("root {root} out of range")));
    }
    let mut adj = vec![Vec::new(); graph.n()];
    for &(u, v) in edge_subset {
        if u >= graph.n() || v >= graph.n() || !graph.has_arc(u, v) {
            return Err(Error::Consistency(format!("arc ({u}, {v}) not in graph")));
        }
        adj[u].push(v);
        if !graph.is_directed() {
            adj[v].push(u);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let tree = bfs(&adj, [root], None, None);
    let parent = tree
        .parent
        .iter()
        .enumerate()
        .filter_map(|(v, p)| p.map(|p| (v, p)))
        .collect();
    Ok(PoiseTree::from_parts_unchecked(root, parent))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[Vertex]) -> BTreeSet<Vertex> {
        xs.iter().copied().collect()
    }

    fn path3() -> Graph {
        Graph::new(3, true, vec![(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn distances_along_a_directed_path() {
        let d = bfs_distances(&path3(), &set(&[0]), None).unwrap();
        assert_eq!(d, BTreeMap::from([(0, 0), (1, 1), (2, 2)]));
    }

    #[test]
    fn sink_only_reaches_itself() {
        let d = bfs_distances(&path3(), &set(&[2]), None).unwrap();
        assert_eq!(d, BTreeMap::from([(2, 0)]));
    }

    #[test]
    fn restriction_disconnects() {
        let d = bfs_distances(&path3(), &set(&[0]), Some(&set(&[0, 2]))).unwrap();
        assert_eq!(d, BTreeMap::from([(0, 0)]));
    }

    #[test]
    fn empty_sources_rejected() {
        assert!(matches!(
            bfs_distances(&path3(), &BTreeSet::new(), None),
            Err(Error::InvalidArgument(_))
        ));
        assert!(bfs_distances(&path3(), &set(&[1]), Some(&set(&[0, 2]))).is_err());
    }

    #[test]
    fn spt_prefers_shorter_path() {
        let g = Graph::new(3, true, vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let t = shortest_path_tree(&g, g.edges(), 0).unwrap();
        assert_eq!(t.parent_map(), &BTreeMap::from([(1, 0), (2, 0)]));
        assert_eq!(t.height(), 1);
    }

    #[test]
    fn spt_of_empty_subset_is_the_root() {
        let g = path3();
        let t = shortest_path_tree(&g, &[], 0).unwrap();
        assert_eq!(t.vertices(), set(&[0]));
        assert_eq!(t.height(), 0);
    }

    #[test]
    fn spt_breaks_ties_by_lowest_id() {
        let g = Graph::new(4, true, vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let t = shortest_path_tree(&g, g.edges(), 0).unwrap();
        assert_eq!(t.parent_of(3), Some(1));
        assert_eq!(t.height(), 2);
    }

    #[test]
    fn spt_rejects_foreign_arcs() {
        let g = path3();
        assert!(matches!(
            shortest_path_tree(&g, &[(1, 0)], 0),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn spt_traverses_undirected_edges_backwards() {
        let g = Graph::new(3, false, vec![(1, 0), (2, 1)]).unwrap();
        let t = shortest_path_tree(&g, g.edges(), 0).unwrap();
        assert_eq!(t.parent_map(), &BTreeMap::from([(1, 0), (2, 1)]));
    }
}
