//! Exhaustive solvers for tiny instances, used as ground truth.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::cover::{CoverageSystem, PartitionMatroid};
use crate::error::{Error, Result};
use crate::graph::{MulticastInstance, PoiseTree, Vertex};

pub const DEFAULT_LIMIT_N: usize = 12;
/// Hard cap for the bitmask searches.
const MAX_N: usize = 24;
pub const MAX_COVER_PAIRS: usize = 20;

/// A minimum-poise `k`-tree with its degree and height.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub best_tree: PoiseTree,
    #[serde(rename = "B_star")]
    pub b_star: usize,
    #[serde(rename = "D_star")]
    pub d_star: usize,
    pub poise_star: usize,
}

/// Searches every `(B, D)` split of increasing poise for a `k`-tree.
pub fn exact_min_poise_ktree(instance: &MulticastInstance, limit_n: usize) -> Result<OracleResult> {
    let n = instance.graph().n();
    let limit = limit_n.min(MAX_N);
    if n > limit {
        return Err(Error::TooLarge { size: n, limit });
    }
    if instance.reachable_terminals() < instance.k() {
        return Err(Error::NoKTree);
    }
    let search = TreeSearch::new(instance);
    for poise in 2..=2 * n {
        for height in 1..poise {
            let degree = poise - height;
            if height >= n || degree > instance.k() {
                continue;
            }
            if let Some(parent) = search.find(degree, height) {
                let tree = PoiseTree::new(instance.root(), parent)?;
                let (b, d) = (tree.max_out_degree(), tree.height());
                debug_assert_eq!(b + d, poise);
                return Ok(OracleResult {
                    best_tree: tree,
                    b_star: b,
                    d_star: d,
                    poise_star: b + d,
                });
            }
        }
    }
    Err(Error::NoKTree)
}

struct TreeSearch<'a> {
    inst: &'a MulticastInstance,
    n: usize,
    is_term: Vec<bool>,
}

struct SearchState {
    degree: usize,
    height: usize,
    order: Vec<Vertex>,
    depth: Vec<usize>,
    parent: Vec<Option<Vertex>>,
    in_tree: u32,
    terms: usize,
}

impl<'a> TreeSearch<'a> {
    fn new(inst: &'a MulticastInstance) -> Self {
        let n = inst.graph().n();
        let mut is_term = vec![false; n];
        for &s in inst.terminals() {
            is_term[s] = true;
        }
        TreeSearch { inst, n, is_term }
    }

    /// Parent map of a `k`-tree with out-degree at most `degree` and height
    /// at most `height`, if one exists.
    fn find(&self, degree: usize, height: usize) -> Option<BTreeMap<Vertex, Vertex>> {
        let root = self.inst.root();
        let mut st = SearchState {
            degree,
            height,
            order: vec![root],
            depth: vec![0; self.n],
            parent: vec![None; self.n],
            in_tree: 1 << root,
            terms: 0,
        };
        self.expand(&mut st, 0).then(|| {
            (0..self.n)
                .filter_map(|v| st.parent[v].map(|p| (v, p)))
                .collect()
        })
    }

    /// Terminals outside the tree reachable from the unexpanded vertices
    /// within their remaining height, through vertices outside the tree.
    fn reachable_bound(&self, st: &SearchState, from: usize) -> usize {
        let g = self.inst.graph();
        let mut best: Vec<Option<usize>> = vec![None; self.n];
        let mut frontier: Vec<(Vertex, usize)> = st.order[from..]
            .iter()
            .filter(|&&u| st.depth[u] < st.height)
            .map(|&u| (u, st.height - st.depth[u]))
            .collect();
        let mut count = 0;
        while let Some((u, budget)) = frontier.pop() {
            if budget == 0 {
                continue;
            }
            for &v in g.out_neighbors(u) {
                if st.in_tree >> v & 1 == 1 {
                    continue;
                }
                let left = budget - 1;
                if best[v].is_none_or(|b| b < left) {
                    if best[v].is_none() && self.is_term[v] {
                        count += 1;
                    }
                    best[v] = Some(left);
                    frontier.push((v, left));
                }
            }
        }
        count
    }

    /// Whether `v` can still lead to a terminal outside the tree within `budget` hops.
    fn useful(&self, st: &SearchState, v: Vertex, budget: usize) -> bool {
        if self.is_term[v] {
            return true;
        }
        let g = self.inst.graph();
        let mut seen = st.in_tree | 1 << v;
        let mut level = vec![v];
        for _ in 0..budget {
            let mut next = Vec::new();
            for &u in &level {
                for &w in g.out_neighbors(u) {
                    if seen >> w & 1 == 0 {
                        if self.is_term[w] {
                            return true;
                        }
                        seen |= 1 << w;
                        next.push(w);
                    }
                }
            }
            level = next;
        }
        false
    }

    fn expand(&self, st: &mut SearchState, idx: usize) -> bool {
        if st.terms >= self.inst.k() {
            return true;
        }
        if idx == st.order.len() || st.terms + self.reachable_bound(st, idx) < self.inst.k() {
            return false;
        }
        let u = st.order[idx];
        if st.depth[u] == st.height {
            return self.expand(st, idx + 1);
        }
        let budget = st.height - st.depth[u] - 1;
        let cands: Vec<Vertex> = self
            .inst
            .graph()
            .out_neighbors(u)
            .iter()
            .copied()
            .filter(|&v| st.in_tree >> v & 1 == 0 && self.useful(st, v, budget))
            .collect();
        let max_take = st.degree.min(cands.len());
        // larger child sets first: they reach k sooner when it is reachable
        for take in (0..=max_take).rev() {
            let mut found = false;
            for_each_subset(cands.len(), take, &mut |pick: &[usize]| {
                if found {
                    return;
                }
                for &i in pick {
                    let v = cands[i];
                    st.in_tree |= 1 << v;
                    st.depth[v] = st.depth[u] + 1;
                    st.parent[v] = Some(u);
                    st.order.push(v);
                    st.terms += self.is_term[v] as usize;
                }
                if self.expand(st, idx + 1) {
                    found = true;
                    return;
                }
                for &i in pick {
                    let v = cands[i];
                    st.in_tree &= !(1 << v);
                    st.parent[v] = None;
                    st.order.pop();
                    st.terms -= self.is_term[v] as usize;
                }
            });
            if found {
                return true;
            }
        }
        false
    }
}

/// Calls `f` with every `take`-subset of `0..len` in lexicographic order.
fn for_each_subset(len: usize, take: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, len: usize, take: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == take {
            f(cur);
            return;
        }
        for i in start..len {
            if len - i < take - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, len, take, cur, f);
            cur.pop();
        }
    }
    rec(0, len, take, &mut Vec::with_capacity(take), f);
}

/// Fewest telephone rounds in which the root informs `k` terminals.
///
/// Breadth-first over informed sets. From each set only maximum matchable
/// receiver sets are tried; any other round is dominated by one of them.
pub fn exact_multicast_rounds(instance: &MulticastInstance) -> Result<usize> {
    let g = instance.graph();
    let n = g.n();
    if n > DEFAULT_LIMIT_N {
        return Err(Error::TooLarge { size: n, limit: DEFAULT_LIMIT_N });
    }
    if instance.reachable_terminals() < instance.k() {
        return Err(Error::NoKTree);
    }
    let term_mask: u32 = instance.terminals().iter().fold(0, |m, &s| m | 1 << s);
    let done = |state: u32| (state & term_mask).count_ones() as usize >= instance.k();
    let start = 1u32 << instance.root();
    if done(start) {
        return Ok(0);
    }
    let mut seen = vec![false; 1 << n];
    seen[start as usize] = true;
    let mut level = vec![start];
    let mut rounds = 0;
    while !level.is_empty() {
        rounds += 1;
        let mut next = Vec::new();
        for &state in &level {
            for grown in maximal_rounds(instance, state) {
                if done(grown) {
                    return Ok(rounds);
                }
                if !seen[grown as usize] {
                    seen[grown as usize] = true;
                    next.push(grown);
                }
            }
        }
        level = next;
    }
    Err(Error::NoKTree)
}

/// Informed sets reachable in one round through a maximum matching.
fn maximal_rounds(instance: &MulticastInstance, state: u32) -> Vec<u32> {
    let g = instance.graph();
    let n = g.n();
    let informed: Vec<Vertex> = (0..n).filter(|&v| state >> v & 1 == 1).collect();
    let receivers: Vec<Vertex> = (0..n)
        .filter(|&v| state >> v & 1 == 0 && g.in_neighbors(v).iter().any(|&u| state >> u & 1 == 1))
        .collect();
    // senders able to call each receiver
    let callers: Vec<Vec<usize>> = receivers
        .iter()
        .map(|&v| {
            informed
                .iter()
                .enumerate()
                .filter(|&(_, &u)| g.has_arc(u, v))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let rank = {
        let mut m = Matching::new(informed.len());
        (0..receivers.len()).filter(|&r| m.try_add(r, &callers)).count()
    };
    let mut out = Vec::new();
    let mut m = Matching::new(informed.len());
    bases(0, 0, rank, &callers, &mut m, &mut Vec::new(), &mut |picked| {
        out.push(picked.iter().fold(state, |s, &r| s | 1 << receivers[r]));
    });
    out
}

fn bases(
    idx: usize,
    size: usize,
    rank: usize,
    callers: &[Vec<usize>],
    m: &mut Matching,
    picked: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if size == rank {
        f(picked);
        return;
    }
    if idx == callers.len() || callers.len() - idx < rank - size {
        return;
    }
    let snapshot = m.clone();
    if m.try_add(idx, callers) {
        picked.push(idx);
        bases(idx + 1, size + 1, rank, callers, m, picked, f);
        picked.pop();
        *m = snapshot;
    }
    bases(idx + 1, size, rank, callers, m, picked, f);
}

/// Bipartite matching from receivers to sender slots, grown by augmenting paths.
#[derive(Clone)]
struct Matching {
    sender_of: Vec<Option<usize>>,
}

impl Matching {
    fn new(senders: usize) -> Self {
        Matching {
            sender_of: vec![None; senders],
        }
    }

    fn try_add(&mut self, r: usize, callers: &[Vec<usize>]) -> bool {
        let mut visited = vec![false; self.sender_of.len()];
        self.augment(r, callers, &mut visited)
    }

    fn augment(&mut self, r: usize, callers: &[Vec<usize>], visited: &mut [bool]) -> bool {
        for &s in &callers[r] {
            if visited[s] {
                continue;
            }
            visited[s] = true;
            if self.sender_of[s].is_none_or(|other| self.augment(other, callers, visited)) {
                self.sender_of[s] = Some(r);
                return true;
            }
        }
        false
    }
}

/// Largest number of elements covered by an independent set of pairs.
pub fn exact_matroid_coverage(system: &CoverageSystem, matroid: &PartitionMatroid) -> Result<usize> {
    let pairs = system.pairs();
    if pairs.len() > MAX_COVER_PAIRS {
        return Err(Error::TooLarge { size: pairs.len(), limit: MAX_COVER_PAIRS });
    }
    let index: BTreeMap<usize, usize> = system.ground().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    if index.len() > 64 {
        return Err(Error::TooLarge { size: index.len(), limit: 64 });
    }
    let masks: Vec<u64> = pairs
        .iter()
        .map(|p| p.covered.iter().fold(0u64, |m, e| m | 1 << index[e]))
        .collect();
    let parts: Vec<Vertex> = (0..pairs.len()).map(|i| matroid.part_of(i)).collect();
    let part_ids: BTreeSet<Vertex> = parts.iter().copied().collect();
    let part_idx: BTreeMap<Vertex, usize> = part_ids.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let parts: Vec<usize> = parts.iter().map(|p| part_idx[p]).collect();
    // suffix unions bound what the remaining pairs can still add
    let mut suffix = vec![0u64; pairs.len() + 1];
    for i in (0..pairs.len()).rev() {
        suffix[i] = suffix[i + 1] | masks[i];
    }
    let mut used = vec![0usize; part_ids.len()];
    let mut best = 0;
    cover_dfs(0, 0, &masks, &parts, &suffix, matroid.capacity(), &mut used, &mut best);
    Ok(best as usize)
}

#[allow(clippy::too_many_arguments)]
fn cover_dfs(
    i: usize,
    covered: u64,
    masks: &[u64],
    parts: &[usize],
    suffix: &[u64],
    cap: usize,
    used: &mut [usize],
    best: &mut u32,
) {
    *best = (*best).max(covered.count_ones());
    if i == masks.len() || (covered | suffix[i]).count_ones() <= *best {
        return;
    }
    if used[parts[i]] < cap && masks[i] & !covered != 0 {
        used[parts[i]] += 1;
        cover_dfs(i + 1, covered | masks[i], masks, parts, suffix, cap, used, best);
        used[parts[i]] -= 1;
    }
    cover_dfs(i + 1, covered, masks, parts, suffix, cap, used, best);
}
