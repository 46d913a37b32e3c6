use std::collections::BTreeSet;
use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use crate::directed::solve_directed;
use crate::error::{Error, Result};
use crate::graph::{bfs, MulticastInstance, PoiseGuess, PoiseTree, TreeMetrics, Vertex};
use crate::undirected::solve_undirected;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Directed,
    Undirected,
    /// Follow the instance's `directed` flag.
    Auto,
}

impl Mode {
    fn resolve(self, instance: &MulticastInstance) -> Result<Mode> {
        match (self, instance.is_directed()) {
            (Mode::Auto, true) | (Mode::Directed, true) => Ok(Mode::Directed),
            (Mode::Auto, false) | (Mode::Undirected, false) => Ok(Mode::Undirected),
            (m, d) => Err(Error::InvalidArgument(format!(
                "mode {m:?} does not match a {} instance",
                if d { "directed" } else { "undirected" }
            ))),
        }
    }
}

/// A solver run for one guess.
#[derive(Debug, Clone)]
pub struct Solved {
    pub tree: PoiseTree,
    pub metrics: TreeMetrics,
    pub trace: serde_json::Value,
}

/// Runs the solver matching `mode` for one guess.
pub fn solve_guess(instance: &MulticastInstance, mode: Mode, guess: PoiseGuess) -> Result<Solved> {
    match mode.resolve(instance)? {
        Mode::Directed => {
            let s = solve_directed(instance, guess)?;
            Ok(Solved {
                metrics: s.trace.metrics,
                trace: serde_json::to_value(&s.trace)?,
                tree: s.tree,
            })
        }
        _ => {
            let s = solve_undirected(instance, guess)?;
            Ok(Solved {
                metrics: s.trace.metrics,
                trace: serde_json::to_value(&s.trace)?,
                tree: s.tree,
            })
        }
    }
}

/// Guesses tried: `B ∈ 1..=b_max`, `D ∈ 1..=d_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepGrid {
    pub b_max: usize,
    pub d_max: usize,
}

/// `b_max = t`. `d_max` is one less than the poise of the BFS tree pruned to
/// the `k` nearest terminals, capped at `n - 1`: no tree of smaller poise can
/// be taller than that.
pub fn sweep_grid(instance: &MulticastInstance) -> SweepGrid {
    let g = instance.graph();
    let tree = bfs(g.adjacency(), [instance.root()], None, None);
    let nearest: BTreeSet<Vertex> = tree
        .order
        .iter()
        .copied()
        .filter(|v| instance.terminals().contains(v))
        .take(instance.k())
        .collect();
    let parent = tree
        .order
        .iter()
        .filter_map(|&v| tree.parent[v].map(|p| (v, p)))
        .collect();
    let bfs_tree = PoiseTree::new(instance.root(), parent)
        .expect("bfs parents form a tree")
        .prune(|v| nearest.contains(&v));
    let upper = bfs_tree.max_out_degree() + bfs_tree.height();
    SweepGrid {
        b_max: instance.terminals().len().max(1),
        d_max: upper.saturating_sub(1).min(g.n().saturating_sub(1)).max(1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub outcome: Outcome,
    pub metrics: Option<TreeMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub wall_us: u64,
    #[serde(skip)]
    pub solved: Option<Solved>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepBest {
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub metrics: TreeMetrics,
    pub tree: PoiseTree,
    pub trace: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub mode: Mode,
    pub grid: SweepGrid,
    /// Whether rows were skipped by the early exit along `B`.
    pub fast_sweep: bool,
    pub records: Vec<SweepRecord>,
    pub best: Option<SweepBest>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub fast: bool,
    /// Worker threads; `None` uses `POISEKIT_THREADS` or rayon's default.
    pub threads: Option<usize>,
}

fn run_one(instance: &MulticastInstance, mode: Mode, b: usize, d: usize) -> Result<SweepRecord> {
    let start = Instant::now();
    let res = solve_guess(instance, mode, PoiseGuess { degree: b, height: d });
    let wall_us = start.elapsed().as_micros() as u64;
    match res {
        Ok(s) => Ok(SweepRecord {
            b,
            d,
            outcome: Outcome::Feasible,
            metrics: Some(s.metrics),
            reason: None,
            wall_us,
            solved: Some(s),
        }),
        Err(Error::InfeasibleGuess(why)) => Ok(SweepRecord {
            b,
            d,
            outcome: Outcome::Infeasible,
            metrics: None,
            reason: Some(why),
            wall_us,
            solved: None,
        }),
        Err(e) => Err(e),
    }
}

/// Solves every guess on the grid and keeps the feasible tree of least
/// poise, ties going to the smaller `B` and then `D`.
pub fn sweep(instance: &MulticastInstance, mode: Mode, opts: SweepOptions) -> Result<SweepReport> {
    let mode = mode.resolve(instance)?;
    let grid = sweep_grid(instance);
    let threads = opts.threads.or_else(|| {
        std::env::var("POISEKIT_THREADS")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .filter(|&t: &usize| t > 0)
    });
    let rows = || -> Vec<Result<Vec<SweepRecord>>> {
        (1..=grid.d_max)
            .into_par_iter()
            .map(|d| {
                let mut row = Vec::new();
                let mut last_feasible: Option<usize> = None;
                for b in 1..=grid.b_max {
                    let rec = run_one(instance, mode, b, d)?;
                    let poise = rec.metrics.map(|m| m.poise);
                    row.push(rec);
                    if opts.fast {
                        if let Some(p) = poise {
                            if last_feasible.is_some_and(|q| p > q) {
                                break;
                            }
                            last_feasible = Some(p);
                        }
                    }
                }
                Ok(row)
            })
            .collect()
    };
    let per_d = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(rows),
        None => rows(),
    };
    let mut records: Vec<SweepRecord> = Vec::new();
    for row in per_d {
        records.extend(row?);
    }
    records.sort_by_key(|r| (r.b, r.d));
    let best = records
        .iter()
        .filter_map(|r| r.solved.as_ref().map(|s| (r, s)))
        .min_by_key(|(r, s)| (s.metrics.poise, r.b, r.d))
        .map(|(r, s)| SweepBest {
            b: r.b,
            d: r.d,
            metrics: s.metrics,
            tree: s.tree.clone(),
            trace: s.trace.clone(),
        });
    Ok(SweepReport {
        mode,
        grid,
        fast_sweep: opts.fast,
        records,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn star(m: usize) -> MulticastInstance {
        let g = Graph::new(m + 1, true, (1..=m).map(|v| (0, v)).collect()).unwrap();
        MulticastInstance::new(g, 0, (1..=m).collect(), m).unwrap()
    }

    #[test]
    fn star_sweep_finds_the_star() {
        let r = sweep(&star(3), Mode::Auto, SweepOptions::default()).unwrap();
        assert_eq!(r.best.unwrap().metrics.poise, 4);
        assert_eq!(r.records.len(), r.grid.b_max * r.grid.d_max);
    }

    #[test]
    fn grid_covers_a_path() {
        let g = Graph::new(4, true, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let inst = MulticastInstance::new(g, 0, [3].into(), 1).unwrap();
        assert_eq!(sweep_grid(&inst), SweepGrid { b_max: 1, d_max: 3 });
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        assert!(solve_guess(&star(2), Mode::Undirected, PoiseGuess::new(1, 1).unwrap()).is_err());
    }

    #[test]
    fn thread_count_does_not_change_the_report() {
        let one = sweep(&star(4), Mode::Auto, SweepOptions { fast: false, threads: Some(1) }).unwrap();
        let four = sweep(&star(4), Mode::Auto, SweepOptions { fast: false, threads: Some(4) }).unwrap();
        let key = |r: &SweepReport| r.records.iter().map(|x| (x.b, x.d, x.outcome, x.metrics)).collect::<Vec<_>>();
        assert_eq!(key(&one), key(&four));
    }
}
