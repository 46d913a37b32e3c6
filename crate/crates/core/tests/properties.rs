mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{random_directed, random_tree, random_undirected, rng, tree_instance};
use poisekit::cli::{sweep, Mode, SweepOptions};
use poisekit::graph::{bfs_distances, ceil_log2, Graph, MulticastInstance, PoiseTree};
use poisekit::oracle::exact_min_poise_ktree;
use poisekit::schedule::{tree_broadcast_schedule, validate_schedule, Schedule};
use proptest::prelude::*;

fn arbitrary_graph() -> impl Strategy<Value = Graph> {
    (2usize..=9, any::<bool>()).prop_flat_map(|(n, directed)| {
        proptest::collection::btree_set((0..n, 0..n), 0..=3 * n).prop_map(move |pairs| {
            let mut seen = BTreeSet::new();
            let edges = pairs
                .into_iter()
                .filter(|&(u, v)| u != v)
                .filter(|&(u, v)| seen.insert(if directed { (u, v) } else { (u.min(v), u.max(v)) }))
                .collect();
            Graph::new(n, directed, edges).unwrap()
        })
    })
}

fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.n();
    let mut d = vec![vec![None; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = Some(0);
        for &v in g.out_neighbors(u) {
            row[v] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bfs_matches_floyd_warshall(g in arbitrary_graph(), s in 0usize..9) {
        let s = s % g.n();
        let fw = floyd_warshall(&g);
        let got = bfs_distances(&g, &BTreeSet::from([s]), None).unwrap();
        let expected: BTreeMap<usize, usize> =
            fw[s].iter().enumerate().filter_map(|(v, d)| d.map(|d| (v, d))).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn instances_survive_json(seed in any::<u64>(), directed in any::<bool>()) {
        let mut g = rng(seed);
        let inst = if directed { random_directed(&mut g, 12) } else { random_undirected(&mut g, 12) };
        let back: MulticastInstance = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn trees_and_schedules_survive_json(seed in any::<u64>(), n in 1usize..40) {
        let tree = random_tree(&mut rng(seed), n);
        let back: PoiseTree = serde_json::from_str(&serde_json::to_string(&tree).unwrap()).unwrap();
        prop_assert_eq!(&back, &tree);
        let schedule = tree_broadcast_schedule(&tree);
        let back: Schedule = serde_json::from_str(&serde_json::to_string(&schedule).unwrap()).unwrap();
        prop_assert_eq!(back, schedule);
    }

    #[test]
    fn tree_schedule_length_is_sandwiched(seed in any::<u64>(), n in 2usize..=200) {
        let tree = random_tree(&mut rng(seed), n);
        let rounds = tree_broadcast_schedule(&tree).len();
        let (deg, height) = (tree.max_out_degree(), tree.height());
        prop_assert!(rounds >= ceil_log2(n));
        prop_assert!(rounds >= height && rounds >= deg);
        prop_assert!(rounds < n);
        prop_assert!(rounds <= deg * height);
        let inst = tree_instance(&tree);
        prop_assert!(validate_schedule(&inst, &tree_broadcast_schedule(&tree), inst.k()).valid);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adding_an_arc_never_raises_the_optimum(seed in any::<u64>(), u in 0usize..12, v in 0usize..12) {
        let inst = random_directed(&mut rng(seed), 9);
        let g = inst.graph();
        let (u, v) = (u % g.n(), v % g.n());
        prop_assume!(u != v && !g.has_arc(u, v));
        let mut edges = g.edges().to_vec();
        edges.push((u, v));
        let bigger = MulticastInstance::new(
            Graph::new(g.n(), true, edges).unwrap(),
            inst.root(),
            inst.terminals().clone(),
            inst.k(),
        )
        .unwrap();
        let before = exact_min_poise_ktree(&inst, 12).unwrap().poise_star;
        let after = exact_min_poise_ktree(&bigger, 12).unwrap().poise_star;
        prop_assert!(after <= before);
    }

    #[test]
    fn full_sweep_visits_every_guess_once(seed in any::<u64>(), directed in any::<bool>()) {
        let mut g = rng(seed);
        let inst = if directed { random_directed(&mut g, 10) } else { random_undirected(&mut g, 10) };
        let report = sweep(&inst, Mode::Auto, SweepOptions::default()).unwrap();
        let seen: BTreeSet<(usize, usize)> = report.records.iter().map(|r| (r.b, r.d)).collect();
        prop_assert_eq!(seen.len(), report.records.len());
        let grid = report.grid;
        prop_assert_eq!(seen.len(), grid.b_max * grid.d_max);
        prop_assert!(seen.iter().all(|&(b, d)| (1..=grid.b_max).contains(&b) && (1..=grid.d_max).contains(&d)));
        let best = report.best.expect("the optimum guess region is on the grid");
        let opt = exact_min_poise_ktree(&inst, 12).unwrap();
        prop_assert!(best.metrics.poise >= opt.poise_star);
    }
}
