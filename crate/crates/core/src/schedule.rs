//! Telephone-model schedules: building one from a tree, replaying and
//! checking arbitrary schedules, and simple round lower bounds.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::{ceil_log2, MulticastInstance, PoiseTree, Vertex};

/// Rounds of `(sender, receiver)` calls. Round `i` of the list is the
/// `(i + 1)`-th round of the broadcast.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub rounds: Vec<Vec<(Vertex, Vertex)>>,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }
}

/// Broadcast time of every subtree: a vertex calls its children slowest
/// subtree first, so `b(v) = max_i (i + b(c_i))` over children sorted by
/// `b` descending, ties to the lower id.
pub fn subtree_rounds(tree: &PoiseTree) -> BTreeMap<Vertex, usize> {
    let children = tree.children();
    let depths = tree.depths();
    let mut by_depth: Vec<Vertex> = depths.keys().copied().collect();
    by_depth.sort_by_key(|v| std::cmp::Reverse(depths[v]));
    let mut b = BTreeMap::new();
    for v in by_depth {
        let order = call_order(&children[&v], &b);
        let t = order.iter().enumerate().map(|(i, c)| i + 1 + b[c]).max().unwrap_or(0);
        b.insert(v, t);
    }
    b
}

fn call_order(children: &[Vertex], b: &BTreeMap<Vertex, usize>) -> Vec<Vertex> {
    let mut order = children.to_vec();
    order.sort_by_key(|c| (std::cmp::Reverse(b[c]), *c));
    order
}

/// Optimal schedule over the tree's arcs. Its length is `b(root)`.
pub fn tree_broadcast_schedule(tree: &PoiseTree) -> Schedule {
    let b = subtree_rounds(tree);
    let children = tree.children();
    let total = b[&tree.root()];
    let mut rounds = vec![Vec::new(); total];
    let mut stack = vec![(tree.root(), 0usize)];
    while let Some((v, informed_at)) = stack.pop() {
        for (i, c) in call_order(&children[&v], &b).into_iter().enumerate() {
            let r = informed_at + i + 1;
            rounds[r - 1].push((v, c));
            stack.push((c, r));
        }
    }
    for round in &mut rounds {
        round.sort_unstable();
    }
    Schedule { rounds }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// 1-based round number.
    pub round: usize,
    pub rule: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub informed_terminals: usize,
    pub rounds: usize,
}

/// Replays `schedule` from the root and reports the first broken rule.
///
/// Rule names: `out_of_range`, `sender_repeated`, `receiver_repeated`,
/// `sender_is_receiver`, `reverse_arc`, `missing_arc`, `sender_uninformed`,
/// `receiver_informed`, and `too_few_terminals` for an otherwise valid
/// schedule that informs fewer than `k` terminals.
pub fn validate_schedule(instance: &MulticastInstance, schedule: &Schedule, k: usize) -> ValidationReport {
    let g = instance.graph();
    let n = g.n();
    let mut informed = vec![false; n];
    informed[instance.root()] = true;
    let count = |informed: &[bool]| instance.terminals().iter().filter(|&&s| informed[s]).count();
    let fail = |round: usize, rule: &str, detail: String, informed: &[bool]| ValidationReport {
        valid: false,
        violations: vec![Violation {
            round,
            rule: rule.to_string(),
            detail,
        }],
        informed_terminals: count(informed),
        rounds: schedule.rounds.len(),
    };
    for (i, round) in schedule.rounds.iter().enumerate() {
        let r = i + 1;
        let mut senders = BTreeSet::new();
        let mut receivers = BTreeSet::new();
        for &(s, v) in round {
            if s >= n || v >= n {
                return fail(r, "out_of_range", format!("call ({s}, {v}) names a missing vertex"), &informed);
            }
            if !senders.insert(s) {
                return fail(r, "sender_repeated", format!("{s} calls twice"), &informed);
            }
            if !receivers.insert(v) {
                return fail(r, "receiver_repeated", format!("{v} is called twice"), &informed);
            }
        }
        if let Some(v) = senders.intersection(&receivers).next() {
            return fail(r, "sender_is_receiver", format!("{v} both calls and is called"), &informed);
        }
        for &(s, v) in round {
            if !g.has_arc(s, v) {
                if g.has_arc(v, s) {
                    return fail(r, "reverse_arc", format!("arc runs {v} -> {s}, not {s} -> {v}"), &informed);
                }
                return fail(r, "missing_arc", format!("no edge between {s} and {v}"), &informed);
            }
            if !informed[s] {
                return fail(r, "sender_uninformed", format!("{s} is not yet informed"), &informed);
            }
            if informed[v] {
                return fail(r, "receiver_informed", format!("{v} is already informed"), &informed);
            }
        }
        for &(_, v) in round {
            informed[v] = true;
        }
    }
    let informed_terminals = count(&informed);
    if informed_terminals < k {
        return fail(
            schedule.rounds.len(),
            "too_few_terminals",
            format!("{informed_terminals} terminals informed, {k} required"),
            &informed,
        );
    }
    ValidationReport {
        valid: true,
        violations: Vec::new(),
        informed_terminals,
        rounds: schedule.rounds.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundBounds {
    /// `⌈log₂(k + 1)⌉`: the informed set at most doubles per round.
    pub doubling: usize,
    /// `⌈(B + D) / 2⌉` of the given tree. A true bound only for an optimal tree.
    pub poise_half: Option<usize>,
}

pub fn round_lower_bounds(instance: &MulticastInstance, tree: Option<&PoiseTree>) -> RoundBounds {
    RoundBounds {
        doubling: ceil_log2(instance.k() + 1),
        poise_half: tree.map(|t| (t.max_out_degree() + t.height()).div_ceil(2)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn tree(root: Vertex, pairs: &[(Vertex, Vertex)]) -> PoiseTree {
        PoiseTree::new(root, pairs.iter().map(|&(p, c)| (c, p)).collect()).unwrap()
    }

    fn instance_of(t: &PoiseTree, n: usize) -> MulticastInstance {
        let g = Graph::new(n, true, t.arcs()).unwrap();
        let terms: BTreeSet<_> = t.parent_map().keys().copied().collect();
        let k = terms.len();
        MulticastInstance::new(g, t.root(), terms, k).unwrap()
    }

    #[test]
    fn star_and_path() {
        assert_eq!(tree_broadcast_schedule(&tree(0, &[(0, 1), (0, 2), (0, 3)])).len(), 3);
        assert_eq!(tree_broadcast_schedule(&tree(0, &[(0, 1), (1, 2), (2, 3), (3, 4)])).len(), 4);
    }

    #[test]
    fn binary_tree_of_height_two() {
        let t = tree(0, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]);
        let s = tree_broadcast_schedule(&t);
        assert_eq!(s.len(), 4);
        let report = validate_schedule(&instance_of(&t, 7), &s, 6);
        assert!(report.valid, "{report:?}");
    }

    #[test]
    fn schedule_json_shape() {
        let s = tree_broadcast_schedule(&tree(0, &[(0, 1), (1, 2)]));
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"rounds":[[[0,1]],[[1,2]]]}"#);
    }

    #[test]
    fn double_send_is_a_matching_violation() {
        let t = tree(0, &[(0, 1), (0, 2)]);
        let s = Schedule {
            rounds: vec![vec![(0, 1), (0, 2)]],
        };
        let r = validate_schedule(&instance_of(&t, 3), &s, 2);
        assert!(!r.valid);
        assert_eq!((r.violations[0].round, r.violations[0].rule.as_str()), (1, "sender_repeated"));
    }

    #[test]
    fn reverse_arc_is_an_orientation_violation() {
        let g = Graph::new(3, true, vec![(0, 1), (2, 1)]).unwrap();
        let inst = MulticastInstance::new(g, 0, [1, 2].into(), 2).unwrap();
        let s = Schedule {
            rounds: vec![vec![(0, 1)], vec![(1, 2)]],
        };
        let r = validate_schedule(&inst, &s, 2);
        assert_eq!((r.violations[0].round, r.violations[0].rule.as_str()), (2, "reverse_arc"));
    }

    #[test]
    fn lower_bounds() {
        let star4 = tree(0, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let lb = round_lower_bounds(&instance_of(&star4, 5), Some(&star4));
        assert_eq!((lb.doubling, lb.poise_half), (3, Some(3)));
        let star7 = tree(0, &(1..=7).map(|v| (0, v)).collect::<Vec<_>>());
        let inst7 = instance_of(&star7, 8);
        assert_eq!(round_lower_bounds(&inst7, None), RoundBounds { doubling: 3, poise_half: None });
        assert_eq!(round_lower_bounds(&inst7.with_k(1).unwrap(), None).doubling, 1);
    }
}
