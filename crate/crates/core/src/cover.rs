//! Maximum coverage under a partition matroid, and the iterated coverage
//! loop built on it.
//!
//! A vertex split `A ∪ C` yields one candidate set per arc `(a, c)` from `A`
//! into `C`: the elements whose representatives lie within `D` hops of `c`
//! inside `G[C]`. Sets are grouped into parts by their anchor `a`, and a
//! selection is independent when it takes at most `capacity` sets from each
//! part. [`greedy_matroid_max`] is the classic greedy for this problem and
//! covers at least half of the optimum; [`pm_cover`] repeats it over the
//! still-uncovered elements until a target is met.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{bfs, mask_of, Graph, Vertex};

pub type ElementId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pair {
    pub a: Vertex,
    pub c: Vertex,
    pub covered: BTreeSet<ElementId>,
}

/// Ground elements plus the candidate sets, kept sorted and unique by `(a, c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageSystem {
    ground: BTreeSet<ElementId>,
    pairs: Vec<Pair>,
}

impl CoverageSystem {
    pub fn new(ground: BTreeSet<ElementId>, mut pairs: Vec<Pair>) -> Result<Self> {
        pairs.sort_by_key(|p| (p.a, p.c));
        if let Some(w) = pairs.windows(2).find(|w| (w[0].a, w[0].c) == (w[1].a, w[1].c)) {
            return Err(Error::InvalidArgument(format!("pair ({}, {}) repeated", w[0].a, w[0].c)));
        }
        if let Some(p) = pairs.iter().find(|p| !p.covered.is_subset(&ground)) {
            return Err(Error::InvalidArgument(format!(
                "pair ({}, {}) covers elements outside the ground set",
                p.a, p.c
            )));
        }
        Ok(CoverageSystem { ground, pairs })
    }

    pub fn ground(&self) -> &BTreeSet<ElementId> {
        &self.ground
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    /// Union of the sets at `indices`.
    pub fn coverage(&self, indices: impl IntoIterator<Item = usize>) -> BTreeSet<ElementId> {
        indices
            .into_iter()
            .flat_map(|i| self.pairs[i].covered.iter().copied())
            .collect()
    }
}

/// Partition of the pair indices into parts with a uniform capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatroid {
    parts: BTreeMap<Vertex, Vec<usize>>,
    part_of: Vec<Vertex>,
    capacity: usize,
}

impl PartitionMatroid {
    /// Parts `X(a)`: the pairs sharing anchor `a`.
    pub fn by_anchor(system: &CoverageSystem, capacity: usize) -> Self {
        let mut parts: BTreeMap<Vertex, Vec<usize>> = BTreeMap::new();
        for (i, p) in system.pairs.iter().enumerate() {
            parts.entry(p.a).or_default().push(i);
        }
        PartitionMatroid {
            part_of: system.pairs.iter().map(|p| p.a).collect(),
            parts,
            capacity,
        }
    }

    /// Explicit parts over `0..num_pairs`; they must be disjoint and cover every index.
    pub fn new(parts: BTreeMap<Vertex, Vec<usize>>, capacity: usize, num_pairs: usize) -> Result<Self> {
        let mut part_of = vec![None; num_pairs];
        for (&key, members) in &parts {
            for &i in members {
                let slot = part_of.get_mut(i).ok_or_else(|| {
                    Error::InvalidArgument(format!("pair index {i} out of range"))
                })?;
                if slot.replace(key).is_some() {
                    return Err(Error::InvalidArgument(format!("pair {i} in two parts")));
                }
            }
        }
        let part_of = part_of
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| Error::InvalidArgument(format!("pair {i} in no part"))))
            .collect::<Result<_>>()?;
        Ok(PartitionMatroid {
            parts,
            part_of,
            capacity,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn parts(&self) -> &BTreeMap<Vertex, Vec<usize>> {
        &self.parts
    }

    pub fn part_of(&self, index: usize) -> Vertex {
        self.part_of[index]
    }

    pub fn num_pairs(&self) -> usize {
        self.part_of.len()
    }

    pub fn is_independent(&self, selection: impl IntoIterator<Item = usize>) -> bool {
        let mut used: BTreeMap<Vertex, usize> = BTreeMap::new();
        selection.into_iter().all(|i| {
            let n = used.entry(self.part_of[i]).or_default();
            *n += 1;
            *n <= self.capacity
        })
    }
}

/// One greedy round of [`pm_cover`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverIteration {
    pub selected: Vec<usize>,
    pub newly_covered: BTreeSet<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverSelection {
    pub chosen: BTreeSet<usize>,
    /// `(a, c)` of every chosen pair, in index order.
    pub arcs: Vec<(Vertex, Vertex)>,
    pub covered_elements: BTreeSet<ElementId>,
    pub iterations: usize,
    pub log: Vec<CoverIteration>,
}

/// How the coverage loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverStatus {
    Reached,
    /// An iteration covered nothing new.
    Stalled,
    /// The iteration cap was hit below the target.
    Exhausted,
}

/// Builds the coverage system of the split `A ∪ C`.
///
/// Each element is covered by pair `(a, c)` when one of its representative
/// vertices lies within `radius` hops of `c` in `G[C]`.
pub fn build_coverage_instance(
    graph: &Graph,
    root: Vertex,
    a_side: &BTreeSet<Vertex>,
    c_side: &BTreeSet<Vertex>,
    elements: &BTreeSet<ElementId>,
    element_location: &BTreeMap<ElementId, BTreeSet<Vertex>>,
    radius: usize,
) -> Result<CoverageSystem> {
    if !a_side.contains(&root) {
        return Err(Error::InvalidArgument(format!("root {root} must lie in A")));
    }
    if let Some(v) = a_side.intersection(c_side).next() {
        return Err(Error::InvalidArgument(format!("vertex {v} lies in both A and C")));
    }
    if a_side.len() + c_side.len() != graph.n() || a_side.iter().chain(c_side).any(|&v| v >= graph.n()) {
        return Err(Error::InvalidArgument("A and C must partition the vertex set".into()));
    }
    let locations: Vec<(ElementId, &BTreeSet<Vertex>)> = elements
        .iter()
        .map(|&e| {
            element_location
                .get(&e)
                .map(|loc| (e, loc))
                .ok_or_else(|| Error::InvalidArgument(format!("element {e} has no location")))
        })
        .collect::<Result<_>>()?;
    let in_c = mask_of(graph.n(), c_side.iter().copied());
    let mut reach_cache: BTreeMap<Vertex, BTreeSet<ElementId>> = BTreeMap::new();
    let mut pairs = Vec::new();
    for &a in a_side {
        for &c in graph.out_neighbors(a) {
            if !in_c[c] {
                continue;
            }
            let covered = reach_cache
                .entry(c)
                .or_insert_with(|| {
                    let tree = bfs(graph.adjacency(), [c], Some(&in_c), Some(radius));
                    locations
                        .iter()
                        .filter(|(_, loc)| loc.iter().any(|&w| w < graph.n() && tree.dist[w].is_some()))
                        .map(|&(e, _)| e)
                        .collect()
                })
                .clone();
            pairs.push(Pair { a, c, covered });
        }
    }
    CoverageSystem::new(elements.clone(), pairs)
}

/// Greedy maximum coverage under the partition matroid.
///
/// Repeatedly takes the pair with the largest number of elements not yet in
/// `already_covered` or the selection, among pairs whose part still has room.
/// Ties go to the lexicographically smallest `(a, c)`. Stops at zero gain.
pub fn greedy_matroid_max(
    system: &CoverageSystem,
    matroid: &PartitionMatroid,
    already_covered: &BTreeSet<ElementId>,
) -> BTreeSet<usize> {
    assert_eq!(matroid.num_pairs(), system.pairs.len(), "matroid must index the system's pairs");
    let mut covered = already_covered.clone();
    let mut used: BTreeMap<Vertex, usize> = BTreeMap::new();
    let mut selected = BTreeSet::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (i, pair) in system.pairs.iter().enumerate() {
            if selected.contains(&i) || used.get(&pair.a).copied().unwrap_or(0) >= matroid.capacity {
                continue;
            }
            let gain = pair.covered.difference(&covered).count();
            if gain > best.map_or(0, |(_, g)| g) {
                best = Some((i, gain));
            }
        }
        let Some((i, _)) = best else { break };
        selected.insert(i);
        *used.entry(matroid.part_of(i)).or_default() += 1;
        covered.extend(system.pairs[i].covered.iter().copied());
    }
    selected
}

/// The coverage loop over a prebuilt system. Never fails; the status says
/// whether the target was met.
pub fn pm_cover_system(
    system: &CoverageSystem,
    matroid: &PartitionMatroid,
    target: usize,
    max_iterations: usize,
) -> (CoverSelection, CoverStatus) {
    let mut sel = CoverSelection {
        chosen: BTreeSet::new(),
        arcs: Vec::new(),
        covered_elements: BTreeSet::new(),
        iterations: 0,
        log: Vec::new(),
    };
    let status = loop {
        if sel.covered_elements.len() >= target {
            break CoverStatus::Reached;
        }
        if sel.iterations >= max_iterations {
            break CoverStatus::Exhausted;
        }
        sel.iterations += 1;
        let picked = greedy_matroid_max(system, matroid, &sel.covered_elements);
        let newly: BTreeSet<ElementId> = system
            .coverage(picked.iter().copied())
            .difference(&sel.covered_elements)
            .copied()
            .collect();
        sel.log.push(CoverIteration {
            selected: picked.iter().copied().collect(),
            newly_covered: newly.clone(),
        });
        if newly.is_empty() {
            break CoverStatus::Stalled;
        }
        sel.chosen.extend(picked);
        sel.covered_elements.extend(newly);
    };
    sel.arcs = sel.chosen.iter().map(|&i| (system.pairs[i].a, system.pairs[i].c)).collect();
    (sel, status)
}

/// Iterated greedy coverage of `target` elements with at most `capacity`
/// pairs per anchor and per iteration.
///
/// Returns after the target is met or `max_iterations` rounds have run. An
/// iteration that covers nothing new while below target is reported as
/// [`Error::CoverStalled`]: no independent selection reaches the remaining
/// elements, so the `(capacity, radius)` budget cannot be met this way.
#[allow(clippy::too_many_arguments)]
pub fn pm_cover(
    graph: &Graph,
    root: Vertex,
    a_side: &BTreeSet<Vertex>,
    c_side: &BTreeSet<Vertex>,
    elements: &BTreeSet<ElementId>,
    element_location: &BTreeMap<ElementId, BTreeSet<Vertex>>,
    target: usize,
    capacity: usize,
    radius: usize,
    max_iterations: usize,
) -> Result<CoverSelection> {
    if target == 0 || max_iterations == 0 {
        return Err(Error::InvalidArgument("target and max_iterations must be positive".into()));
    }
    let system = build_coverage_instance(graph, root, a_side, c_side, elements, element_location, radius)?;
    let matroid = PartitionMatroid::by_anchor(&system, capacity);
    match pm_cover_system(&system, &matroid, target, max_iterations) {
        (sel, CoverStatus::Stalled) => Err(Error::CoverStalled {
            iteration: sel.iterations,
            covered: sel.covered_elements.len(),
            target,
        }),
        (sel, _) => Ok(sel),
    }
}

/// `⌈log₂ target⌉ + 1`, enough rounds for a half-approximate greedy to reach
/// any target a single independent selection can cover.
pub fn default_max_iterations(target: usize) -> usize {
    crate::graph::ceil_log2(target.max(1)) + 1
}

/// Singleton locations: each element is its own vertex.
pub fn singleton_locations(elements: &BTreeSet<ElementId>) -> BTreeMap<ElementId, BTreeSet<Vertex>> {
    elements.iter().map(|&e| (e, BTreeSet::from([e]))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    /// 0 -> 1 -> 3 and 0 -> 2 -> 4.
    fn two_branch() -> Graph {
        Graph::new(5, true, vec![(0, 1), (0, 2), (1, 3), (2, 4)]).unwrap()
    }

    fn two_branch_system(radius: usize) -> CoverageSystem {
        let elems = set(&[3, 4]);
        build_coverage_instance(
            &two_branch(),
            0,
            &set(&[0]),
            &set(&[1, 2, 3, 4]),
            &elems,
            &singleton_locations(&elems),
            radius,
        )
        .unwrap()
    }

    fn flat_system(sets: &[&[usize]]) -> CoverageSystem {
        let pairs = sets
            .iter()
            .enumerate()
            .map(|(i, s)| Pair { a: 0, c: i + 1, covered: set(s) })
            .collect();
        let ground = sets.iter().flat_map(|s| s.iter().copied()).collect();
        CoverageSystem::new(ground, pairs).unwrap()
    }

    #[test]
    fn pairs_follow_arcs_out_of_a() {
        let sys = two_branch_system(2);
        let got: Vec<_> = sys.pairs().iter().map(|p| (p.a, p.c, p.covered.clone())).collect();
        assert_eq!(got, vec![(0, 1, set(&[3])), (0, 2, set(&[4]))]);
    }

    #[test]
    fn zero_radius_covers_nothing() {
        assert!(two_branch_system(0).pairs().iter().all(|p| p.covered.is_empty()));
    }

    #[test]
    fn representative_sets_use_min_distance() {
        let loc = BTreeMap::from([(7, set(&[3, 4]))]);
        let sys = build_coverage_instance(&two_branch(), 0, &set(&[0]), &set(&[1, 2, 3, 4]), &set(&[7]), &loc, 1)
            .unwrap();
        assert_eq!(sys.pairs()[0].covered, set(&[7]));
        assert_eq!(sys.pairs()[1].covered, set(&[7]));
    }

    #[test]
    fn root_outside_a_is_rejected() {
        let elems = set(&[3]);
        let err = build_coverage_instance(
            &two_branch(),
            0,
            &set(&[1]),
            &set(&[0, 2, 3, 4]),
            &elems,
            &singleton_locations(&elems),
            2,
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn greedy_uses_tie_break_order() {
        let sys = flat_system(&[&[1, 2], &[2, 3], &[3]]);
        let m = PartitionMatroid::by_anchor(&sys, 2);
        let sel = greedy_matroid_max(&sys, &m, &BTreeSet::new());
        assert_eq!(sel, set(&[0, 1]));
        assert_eq!(sys.coverage(sel), set(&[1, 2, 3]));
    }

    #[test]
    fn greedy_respects_capacity() {
        let sys = flat_system(&[&[1, 2], &[3, 4, 5]]);
        let m = PartitionMatroid::by_anchor(&sys, 1);
        assert_eq!(greedy_matroid_max(&sys, &m, &BTreeSet::new()), set(&[1]));
    }

    #[test]
    fn greedy_ignores_already_covered() {
        let sys = flat_system(&[&[1, 2], &[3]]);
        let m = PartitionMatroid::by_anchor(&sys, 2);
        assert_eq!(greedy_matroid_max(&sys, &m, &set(&[1, 2])), set(&[1]));
    }

    #[test]
    fn pm_cover_unit_capacity_takes_two_rounds() {
        let elems = set(&[3, 4]);
        let sel = pm_cover(
            &two_branch(),
            0,
            &set(&[0]),
            &set(&[1, 2, 3, 4]),
            &elems,
            &singleton_locations(&elems),
            2,
            1,
            2,
            default_max_iterations(2),
        )
        .unwrap();
        assert_eq!(sel.arcs, vec![(0, 1), (0, 2)]);
        assert_eq!(sel.iterations, 2);
        assert_eq!(sel.covered_elements, elems);
    }

    #[test]
    fn pm_cover_capacity_two_takes_one_round() {
        let elems = set(&[3, 4]);
        let sel = pm_cover(
            &two_branch(),
            0,
            &set(&[0]),
            &set(&[1, 2, 3, 4]),
            &elems,
            &singleton_locations(&elems),
            2,
            2,
            2,
            2,
        )
        .unwrap();
        assert_eq!(sel.iterations, 1);
        assert_eq!(sel.arcs.len(), 2);
    }

    #[test]
    fn pm_cover_stalls_when_nothing_is_coverable() {
        let g = Graph::new(5, true, vec![(0, 1), (0, 2)]).unwrap();
        let elems = set(&[3, 4]);
        let err = pm_cover(&g, 0, &set(&[0]), &set(&[1, 2, 3, 4]), &elems, &singleton_locations(&elems), 2, 1, 2, 2)
            .unwrap_err();
        assert!(matches!(err, Error::CoverStalled { iteration: 1, covered: 0, target: 2 }));
    }

    #[test]
    fn explicit_matroid_validates_partition() {
        assert!(PartitionMatroid::new(BTreeMap::from([(0, vec![0, 1]), (1, vec![1])]), 1, 2).is_err());
        assert!(PartitionMatroid::new(BTreeMap::from([(0, vec![0])]), 1, 2).is_err());
        let m = PartitionMatroid::new(BTreeMap::from([(0, vec![0, 2]), (1, vec![1])]), 1, 3).unwrap();
        assert!(m.is_independent([0, 1]));
        assert!(!m.is_independent([0, 2]));
    }
}
