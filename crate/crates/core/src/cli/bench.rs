use std::time::Instant;

use serde::Serialize;

use super::sweep::{sweep, Mode, SweepOptions};
use crate::error::{Error, Result};
use crate::graph::{generate_instance, GenParams, Model};
use crate::oracle::{exact_min_poise_ktree, DEFAULT_LIMIT_N};
use crate::schedule::{round_lower_bounds, tree_broadcast_schedule};

/// One instance recipe of a suite.
#[derive(Debug, Clone, Copy)]
pub struct Recipe {
    pub model: Model,
    pub directed: bool,
    pub terminals: usize,
    pub k: usize,
}

const fn recipe(model: Model, directed: bool, terminals: usize, k: usize) -> Recipe {
    Recipe {
        model,
        directed,
        terminals,
        k,
    }
}

/// Oracle-sized instances: every normalized graph has at most 12 vertices.
const DESK: &[Recipe] = &[
    recipe(Model::RandomDigraph { n: 5, m: 10 }, true, 4, 3),
    recipe(Model::RandomDigraph { n: 6, m: 14 }, true, 4, 4),
    recipe(Model::StarOfStars { branch: 2, leaf: 2 }, true, 4, 3),
    recipe(Model::LayeredDag { width: 2, depth: 3 }, true, 2, 2),
    recipe(Model::Grid { w: 2, h: 3 }, false, 4, 3),
    recipe(Model::RandomDigraph { n: 6, m: 7 }, false, 4, 3),
    recipe(Model::RandomDigraph { n: 5, m: 6 }, false, 3, 3),
    recipe(Model::Grid { w: 3, h: 2 }, false, 3, 2),
];

/// Larger instances, no oracle column.
const LAB: &[Recipe] = &[
    recipe(Model::RandomDigraph { n: 40, m: 120 }, true, 15, 10),
    recipe(Model::LayeredDag { width: 6, depth: 5 }, true, 6, 5),
    recipe(Model::StarOfStars { branch: 6, leaf: 6 }, true, 36, 20),
    recipe(Model::Grid { w: 6, h: 6 }, false, 12, 10),
    recipe(Model::RandomDigraph { n: 40, m: 80 }, false, 15, 10),
];

const SEEDS_PER_RECIPE: u64 = 2;

pub const SUITES: &[&str] = &["desk", "lab"];

pub fn suite(name: &str) -> Result<&'static [Recipe]> {
    match name {
        "desk" => Ok(DESK),
        "lab" => Ok(LAB),
        other => Err(Error::InvalidArgument(format!(
            "unknown suite {other:?}; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

/// A CSV row. Optional fields are left blank.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub suite: String,
    pub model: String,
    pub directed: bool,
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub seed: u64,
    pub best_b: Option<usize>,
    pub best_d: Option<usize>,
    pub poise: Option<usize>,
    pub oracle_poise: Option<usize>,
    pub ratio: Option<String>,
    pub rounds: Option<usize>,
    pub doubling_bound: usize,
    pub poise_half: Option<usize>,
    pub time_us: Option<u64>,
}

pub const COLUMNS: &[&str] = &[
    "suite",
    "model",
    "directed",
    "n",
    "t",
    "k",
    "seed",
    "best_B",
    "best_D",
    "poise",
    "oracle_poise",
    "ratio",
    "rounds",
    "doubling_bound",
    "poise_half",
];

/// Runs a suite. Rows come out in recipe order, two seeds per recipe
/// starting at `seed`.
pub fn run_suite(name: &str, seed: u64, timing: bool) -> Result<Vec<BenchRow>> {
    let recipes = suite(name)?;
    let mut rows = Vec::new();
    for (i, r) in recipes.iter().enumerate() {
        for j in 0..SEEDS_PER_RECIPE {
            let s = seed
                .wrapping_mul(1_000)
                .wrapping_add(i as u64 * SEEDS_PER_RECIPE + j);
            let params = GenParams {
                terminals: Some(r.terminals),
                directed: Some(r.directed),
                ..GenParams::new(r.k, s)
            };
            let inst = generate_instance(&r.model, &params)?;
            let start = Instant::now();
            let report = sweep(&inst, Mode::Auto, SweepOptions::default())?;
            let elapsed = start.elapsed().as_micros() as u64;
            let oracle_poise = if inst.graph().n() <= DEFAULT_LIMIT_N {
                Some(exact_min_poise_ktree(&inst, DEFAULT_LIMIT_N)?.poise_star)
            } else {
                None
            };
            let best = report.best.as_ref();
            let bounds = round_lower_bounds(&inst, best.map(|b| &b.tree));
            let poise = best.map(|b| b.metrics.poise);
            rows.push(BenchRow {
                suite: name.to_string(),
                model: r.model.to_string(),
                directed: r.directed,
                n: inst.graph().n(),
                t: inst.terminals().len(),
                k: inst.k(),
                seed: s,
                best_b: best.map(|b| b.b),
                best_d: best.map(|b| b.d),
                poise,
                oracle_poise,
                ratio: poise.zip(oracle_poise).map(|(p, q)| format!("{:.4}", p as f64 / q as f64)),
                rounds: best.map(|b| tree_broadcast_schedule(&b.tree).len()),
                doubling_bound: bounds.doubling,
                poise_half: bounds.poise_half,
                time_us: timing.then_some(elapsed),
            });
        }
    }
    Ok(rows)
}

/// Renders rows with the fixed header, plus `time_us` when timing.
pub fn to_csv(rows: &[BenchRow], timing: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if timing {
        header.push("time_us");
    }
    w.write_record(&header).map_err(csv_err)?;
    let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![
            r.suite.clone(),
            r.model.clone(),
            r.directed.to_string(),
            r.n.to_string(),
            r.t.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            opt(r.best_b),
            opt(r.best_d),
            opt(r.poise),
            opt(r.oracle_poise),
            r.ratio.clone().unwrap_or_default(),
            opt(r.rounds),
            r.doubling_bound.to_string(),
            opt(r.poise_half),
        ];
        if timing {
            rec.push(r.time_us.map(|t| t.to_string()).unwrap_or_default());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
