//! Seeded instance and tree samplers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use poisekit::graph::{generate_instance, GenParams, Graph, Model, MulticastInstance, PoiseTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Normalized directed instance with at most `max_n` vertices.
pub fn random_directed(rng: &mut ChaCha8Rng, max_n: usize) -> MulticastInstance {
    loop {
        let (model, t) = match rng.gen_range(0..6) {
            0 => {
                let w = rng.gen_range(1..=2);
                let d = rng.gen_range(1..=3);
                (Model::LayeredDag { width: w, depth: d }, w)
            }
            1 => {
                let b = rng.gen_range(1..=2);
                let l = rng.gen_range(1..=2);
                (Model::StarOfStars { branch: b, leaf: l }, b * l)
            }
            _ => {
                let n = rng.gen_range(3..=6);
                let m = rng.gen_range(n - 1..=(n * (n - 1)).min(3 * n));
                let t = rng.gen_range(1..=(n - 1).min(max_n.saturating_sub(n)).max(1));
                (Model::RandomDigraph { n, m }, t)
            }
        };
        if let Some(inst) = sample(rng, model, true, t, max_n) {
            return inst;
        }
    }
}

/// Normalized connected undirected instance with at most `max_n` vertices.
pub fn random_undirected(rng: &mut ChaCha8Rng, max_n: usize) -> MulticastInstance {
    loop {
        let (model, t) = match rng.gen_range(0..5) {
            0 => {
                let (w, h) = [(2, 2), (2, 3), (3, 2)][rng.gen_range(0..3)];
                let t = rng.gen_range(1..=(w * h - 1).min(max_n.saturating_sub(w * h)).max(1));
                (Model::Grid { w, h }, t)
            }
            _ => {
                let n = rng.gen_range(3..=6);
                let m = rng.gen_range(n - 1..=(n * (n - 1) / 2).min(2 * n));
                let t = rng.gen_range(1..=(n - 1).min(max_n.saturating_sub(n)).max(1));
                (Model::RandomDigraph { n, m }, t)
            }
        };
        if let Some(inst) = sample(rng, model, false, t, max_n) {
            return inst;
        }
    }
}

fn sample(rng: &mut ChaCha8Rng, model: Model, directed: bool, t: usize, max_n: usize) -> Option<MulticastInstance> {
    let k = rng.gen_range(1..=t);
    let params = GenParams {
        terminals: Some(t),
        directed: Some(directed),
        ..GenParams::new(k, rng.gen())
    };
    let inst = generate_instance(&model, &params).ok()?;
    (inst.graph().n() <= max_n).then_some(inst)
}

/// Random recursive tree on `n` vertices with shuffled labels and a random root.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> PoiseTree {
    let mut label: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        label.swap(i, rng.gen_range(0..=i));
    }
    let parent: BTreeMap<usize, usize> = (1..n)
        .map(|v| (label[v], label[rng.gen_range(0..v)]))
        .collect();
    PoiseTree::new(label[0], parent).unwrap()
}

/// The tree's arcs as a directed graph, every non-root vertex a terminal.
pub fn tree_instance(tree: &PoiseTree) -> MulticastInstance {
    let n = tree.vertices().iter().max().unwrap() + 1;
    let g = Graph::new(n, true, tree.arcs()).unwrap();
    assert!(tree.len() >= 2, "a lone root has nothing to inform");
    let terms: BTreeSet<usize> = tree.parent_map().keys().copied().collect();
    let k = terms.len();
    MulticastInstance::new(g, tree.root(), terms, k).unwrap()
}
