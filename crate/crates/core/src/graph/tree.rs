use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{MulticastInstance, Vertex};
use crate::error::{Error, Result};

/// A rooted out-tree stored as a parent map. The root and every vertex
/// outside the tree are absent from the map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeJson", into = "TreeJson")]
pub struct PoiseTree {
    root: Vertex,
    parent: BTreeMap<Vertex, Vertex>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    root: Vertex,
    parent: BTreeMap<Vertex, Vertex>,
}

impl TryFrom<TreeJson> for PoiseTree {
    type Error = Error;

    fn try_from(raw: TreeJson) -> Result<Self> {
        PoiseTree::new(raw.root, raw.parent)
    }
}

impl From<PoiseTree> for TreeJson {
    fn from(t: PoiseTree) -> Self {
        TreeJson {
            root: t.root,
            parent: t.parent,
        }
    }
}

impl PoiseTree {
    /// Checks that following parents from any vertex ends at `root`.
    pub fn new(root: Vertex, parent: BTreeMap<Vertex, Vertex>) -> Result<Self> {
        if parent.contains_key(&root) {
            return Err(Error::Consistency(format!("root {root} has a parent")));
        }
        for &start in parent.keys() {
            let mut cur = start;
            let mut steps = 0;
            while cur != root {
                cur = *parent.get(&cur).ok_or_else(|| {
                    Error::Consistency(format!("vertex {start} does not reach the root"))
                })?;
                steps += 1;
                if steps > parent.len() {
                    return Err(Error::Consistency(format!("cycle through vertex {start}")));
                }
            }
        }
        Ok(PoiseTree { root, parent })
    }

    pub(crate) fn from_parts_unchecked(root: Vertex, parent: BTreeMap<Vertex, Vertex>) -> Self {
        debug_assert!(PoiseTree::new(root, parent.clone()).is_ok());
        PoiseTree { root, parent }
    }

    pub fn singleton(root: Vertex) -> Self {
        PoiseTree {
            root,
            parent: BTreeMap::new(),
        }
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn parent_of(&self, v: Vertex) -> Option<Vertex> {
        self.parent.get(&v).copied()
    }

    pub fn parent_map(&self) -> &BTreeMap<Vertex, Vertex> {
        &self.parent
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v == self.root || self.parent.contains_key(&v)
    }

    /// Number of vertices, root included.
    pub fn len(&self) -> usize {
        self.parent.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        std::iter::once(self.root)
            .chain(self.parent.keys().copied())
            .collect()
    }

    /// `(parent, child)` arcs in ascending child order.
    pub fn arcs(&self) -> Vec<(Vertex, Vertex)> {
        self.parent.iter().map(|(&v, &p)| (p, v)).collect()
    }

    /// Children lists in ascending id order; leaves map to an empty list.
    pub fn children(&self) -> BTreeMap<Vertex, Vec<Vertex>> {
        let mut ch: BTreeMap<Vertex, Vec<Vertex>> =
            self.vertices().into_iter().map(|v| (v, Vec::new())).collect();
        for (&v, &p) in &self.parent {
            ch.get_mut(&p).expect("parent is a tree vertex").push(v);
        }
        ch
    }

    pub fn depths(&self) -> BTreeMap<Vertex, usize> {
        let children = self.children();
        let mut depth = BTreeMap::from([(self.root, 0)]);
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            let d = depth[&u];
            for &c in &children[&u] {
                depth.insert(c, d + 1);
                stack.push(c);
            }
        }
        depth
    }

    pub fn height(&self) -> usize {
        self.depths().values().copied().max().unwrap_or(0)
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.parent.values().filter(|&&p| p == v).count()
    }

    pub fn max_out_degree(&self) -> usize {
        let mut counts: BTreeMap<Vertex, usize> = BTreeMap::new();
        for &p in self.parent.values() {
            *counts.entry(p).or_default() += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }

    /// Drops every branch that contains no vertex satisfying `keep`.
    /// The root always stays.
    pub fn prune(&self, keep: impl Fn(Vertex) -> bool) -> PoiseTree {
        let mut needed: BTreeSet<Vertex> = BTreeSet::new();
        for &v in self.parent.keys() {
            if keep(v) {
                let mut cur = v;
                while cur != self.root && needed.insert(cur) {
                    cur = self.parent[&cur];
                }
            }
        }
        let parent = self
            .parent
            .iter()
            .filter(|(v, _)| needed.contains(v))
            .map(|(&v, &p)| (v, p))
            .collect();
        PoiseTree {
            root: self.root,
            parent,
        }
    }
}

/// Degree, height, poise and terminal count of a tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeMetrics {
    pub max_out_degree: usize,
    pub height: usize,
    pub poise: usize,
    pub terminals_covered: usize,
}

pub fn tree_metrics(tree: &PoiseTree, instance: &MulticastInstance) -> Result<TreeMetrics> {
    let g = instance.graph();
    if tree.root() != instance.root() {
        return Err(Error::Consistency(format!(
            "tree rooted at {} but instance root is {}",
            tree.root(),
            instance.root()
        )));
    }
    for (p, v) in tree.arcs() {
        if p >= g.n() || v >= g.n() || !g.has_arc(p, v) {
            return Err(Error::Consistency(format!("tree arc ({p}, {v}) not in graph")));
        }
    }
    let max_out_degree = tree.max_out_degree();
    let height = tree.height();
    let terminals_covered = instance
        .terminals()
        .iter()
        .filter(|&&s| tree.contains(s))
        .count();
    Ok(TreeMetrics {
        max_out_degree,
        height,
        poise: max_out_degree + height,
        terminals_covered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn star3() -> MulticastInstance {
        let g = Graph::new(4, true, vec![(0, 1), (0, 2), (0, 3)]).unwrap();
        MulticastInstance::new(g, 0, [1, 2, 3].into(), 3).unwrap()
    }

    #[test]
    fn star_metrics() {
        let inst = star3();
        let t = PoiseTree::new(0, BTreeMap::from([(1, 0), (2, 0), (3, 0)])).unwrap();
        let m = tree_metrics(&t, &inst).unwrap();
        assert_eq!(
            (m.max_out_degree, m.height, m.poise, m.terminals_covered),
            (3, 1, 4, 3)
        );
    }

    #[test]
    fn path_metrics() {
        let g = Graph::new(5, true, vec![(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let inst = MulticastInstance::new(g, 0, [4].into(), 1).unwrap();
        let t = PoiseTree::new(0, BTreeMap::from([(1, 0), (2, 1), (3, 2), (4, 3)])).unwrap();
        let m = tree_metrics(&t, &inst).unwrap();
        assert_eq!(
            (m.max_out_degree, m.height, m.poise, m.terminals_covered),
            (1, 4, 5, 1)
        );
    }

    #[test]
    fn singleton_metrics() {
        let m = tree_metrics(&PoiseTree::singleton(0), &star3()).unwrap();
        assert_eq!(
            (m.max_out_degree, m.height, m.poise, m.terminals_covered),
            (0, 0, 0, 0)
        );
    }

    #[test]
    fn foreign_arc_is_a_consistency_error() {
        let t = PoiseTree::new(0, BTreeMap::from([(1, 0), (2, 1)])).unwrap();
        assert!(matches!(tree_metrics(&t, &star3()), Err(Error::Consistency(_))));
    }

    #[test]
    fn rejects_cycles_and_dangling_parents() {
        assert!(PoiseTree::new(0, BTreeMap::from([(1, 2), (2, 1)])).is_err());
        assert!(PoiseTree::new(0, BTreeMap::from([(1, 5)])).is_err());
        assert!(PoiseTree::new(0, BTreeMap::from([(0, 1), (1, 0)])).is_err());
    }

    #[test]
    fn prune_keeps_only_marked_branches() {
        let t = PoiseTree::new(0, BTreeMap::from([(1, 0), (2, 0), (3, 1), (4, 2)])).unwrap();
        let p = t.prune(|v| v == 3);
        assert_eq!(p.vertices(), [0, 1, 3].into());
    }

    #[test]
    fn json_uses_string_keys_in_numeric_order() {
        let t = PoiseTree::new(0, BTreeMap::from([(2, 0), (10, 2)])).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"root":0,"parent":{"2":0,"10":2}}"#);
        let back: PoiseTree = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<PoiseTree>(r#"{"root":0,"parent":{"1":2,"2":1}}"#).is_err());
    }
}
