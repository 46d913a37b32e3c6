use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{normalize_terminals, Graph, MulticastInstance, Vertex};
use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 16;

/// Random and constructive instance families. The root is always vertex 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `m` distinct arcs over `n` vertices. Undirected samples are connected.
    RandomDigraph { n: usize, m: usize },
    /// Root feeding `depth` layers of `width` vertices, each vertex wired to
    /// one or two random vertices of the previous layer.
    LayeredDag { width: usize, depth: usize },
    /// `w × h` grid rooted at a corner.
    Grid { w: usize, h: usize },
    /// Root with `branch` hubs, each carrying `leaf` leaves.
    StarOfStars { branch: usize, leaf: usize },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::RandomDigraph { .. } => "random-digraph",
            Model::LayeredDag { .. } => "layered-dag",
            Model::Grid { .. } => "grid",
            Model::StarOfStars { .. } => "star-of-stars",
        }
    }

    fn directed_by_default(&self) -> bool {
        !matches!(self, Model::Grid { .. })
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Model::RandomDigraph { n, m } => write!(f, "random-digraph:n={n},m={m}"),
            Model::LayeredDag { width, depth } => write!(f, "layered-dag:width={width},depth={depth}"),
            Model::Grid { w, h } => write!(f, "grid:w={w},h={h}"),
            Model::StarOfStars { branch, leaf } => write!(f, "star-of-stars:branch={branch},leaf={leaf}"),
        }
    }
}

/// Parses `name:key=value,...`, e.g. `grid:w=3,h=4`.
impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = Vec::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got {part:?}")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{k} is not a count: {v:?}")))?;
            kv.push((k.trim().to_string(), v));
        }
        let get = |key: &str| {
            kv.iter()
                .find(|(k, _)| k == key)
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::InvalidArgument(format!("model {name} needs {key}=")))
        };
        match name {
            "random-digraph" => Ok(Model::RandomDigraph { n: get("n")?, m: get("m")? }),
            "layered-dag" => Ok(Model::LayeredDag { width: get("width")?, depth: get("depth")? }),
            "grid" => Ok(Model::Grid { w: get("w")?, h: get("h")? }),
            "star-of-stars" => Ok(Model::StarOfStars { branch: get("branch")?, leaf: get("leaf")? }),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub k: usize,
    /// Terminal count; defaults to the model's natural pool (leaves, last
    /// layer) or half the non-root vertices for the random and grid models.
    pub terminals: Option<usize>,
    pub seed: u64,
    /// Overrides the model's default orientation.
    pub directed: Option<bool>,
}

impl GenParams {
    pub fn new(k: usize, seed: u64) -> Self {
        GenParams {
            k,
            terminals: None,
            seed,
            directed: None,
        }
    }
}

/// Samples a normalized instance whose root reaches at least `k` terminals.
/// Deterministic for a fixed seed.
pub fn generate_instance(model: &Model, params: &GenParams) -> Result<MulticastInstance> {
    if params.k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let directed = params.directed.unwrap_or_else(|| model.directed_by_default());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best_reach = 0;
    for _ in 0..MAX_ATTEMPTS {
        let (n, edges, pool) = sample_graph(model, directed, &mut rng)?;
        let t = params.terminals.unwrap_or(match model {
            Model::StarOfStars { .. } | Model::LayeredDag { .. } => pool.len(),
            _ => params.k.max(pool.len() / 2),
        });
        if t < params.k {
            return Err(Error::InvalidArgument(format!(
                "{t} terminals cannot satisfy k = {}",
                params.k
            )));
        }
        if t > pool.len() {
            return Err(Error::UnreachableK {
                reachable: pool.len(),
                k: params.k,
            });
        }
        let terminals: BTreeSet<Vertex> = sample(&mut rng, pool.len(), t)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        let graph = Graph::new(n, directed, edges)?;
        let inst = MulticastInstance::new(graph, 0, terminals, params.k)?;
        let reach = inst.reachable_terminals();
        if reach >= params.k {
            return normalize_terminals(&inst);
        }
        best_reach = best_reach.max(reach);
    }
    Err(Error::UnreachableK {
        reachable: best_reach,
        k: params.k,
    })
}

type Sampled = (usize, Vec<(Vertex, Vertex)>, Vec<Vertex>);

fn sample_graph(model: &Model, directed: bool, rng: &mut ChaCha8Rng) -> Result<Sampled> {
    match *model {
        Model::RandomDigraph { n, m } => {
            if n < 2 {
                return Err(Error::InvalidArgument("random-digraph needs n >= 2".into()));
            }
            let max = if directed { n * (n - 1) } else { n * (n - 1) / 2 };
            if m > max {
                return Err(Error::InvalidArgument(format!("m = {m} exceeds {max}")));
            }
            if !directed && m + 1 < n {
                return Err(Error::InvalidArgument(format!(
                    "a connected graph on {n} vertices needs m >= {}",
                    n - 1
                )));
            }
            let mut edges = Vec::with_capacity(m);
            let mut seen = BTreeSet::new();
            if !directed {
                // random recursive tree keeps the sample connected
                for v in 1..n {
                    let u = rng.gen_range(0..v);
                    seen.insert((u, v));
                    edges.push((u, v));
                }
            }
            while edges.len() < m {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u == v {
                    continue;
                }
                let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
                if seen.insert(key) {
                    edges.push(key);
                }
            }
            Ok((n, edges, (1..n).collect()))
        }
        Model::LayeredDag { width, depth } => {
            if width == 0 || depth == 0 {
                return Err(Error::InvalidArgument("layered-dag needs width, depth >= 1".into()));
            }
            let id = |layer: usize, i: usize| 1 + (layer - 1) * width + i;
            let mut edges: Vec<_> = (0..width).map(|i| (0, id(1, i))).collect();
            for layer in 2..=depth {
                for i in 0..width {
                    let fan_in = if width > 1 && rng.gen_bool(0.5) { 2 } else { 1 };
                    let mut parents: Vec<usize> = sample(rng, width, fan_in).into_vec();
                    parents.sort_unstable();
                    for p in parents {
                        edges.push((id(layer - 1, p), id(layer, i)));
                    }
                }
            }
            let pool = (0..width).map(|i| id(depth, i)).collect();
            Ok((1 + width * depth, edges, pool))
        }
        Model::Grid { w, h } => {
            if w == 0 || h == 0 || w * h < 2 {
                return Err(Error::InvalidArgument("grid needs at least two cells".into()));
            }
            let mut edges = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    let v = y * w + x;
                    if x + 1 < w {
                        edges.push((v, v + 1));
                    }
                    if y + 1 < h {
                        edges.push((v, v + w));
                    }
                }
            }
            Ok((w * h, edges, (1..w * h).collect()))
        }
        Model::StarOfStars { branch, leaf } => {
            if branch == 0 || leaf == 0 {
                return Err(Error::InvalidArgument("star-of-stars needs branch, leaf >= 1".into()));
            }
            let mut edges = Vec::new();
            let mut pool = Vec::new();
            for hub in 1..=branch {
                edges.push((0, hub));
                for j in 0..leaf {
                    let v = branch + 1 + (hub - 1) * leaf + j;
                    edges.push((hub, v));
                    pool.push(v);
                }
            }
            Ok((1 + branch + branch * leaf, edges, pool))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_of_stars_is_constructive() {
        let inst = generate_instance(&Model::StarOfStars { branch: 3, leaf: 2 }, &GenParams::new(6, 0)).unwrap();
        assert_eq!(inst.graph().out_degree(0), 3);
        assert_eq!(inst.terminals().len(), 6);
        assert_eq!(inst.reachable_terminals(), 6);
        assert!(inst.is_normalized());
    }

    #[test]
    fn random_digraph_is_deterministic() {
        let model = Model::RandomDigraph { n: 20, m: 60 };
        let a = generate_instance(&model, &GenParams::new(3, 7)).unwrap();
        let b = generate_instance(&model, &GenParams::new(3, 7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.graph().edges().len(), 60 + a.terminals().len());
        let c = generate_instance(&model, &GenParams::new(3, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn small_grid_cannot_host_too_many_terminals() {
        let err = generate_instance(&Model::Grid { w: 2, h: 2 }, &GenParams::new(5, 1)).unwrap_err();
        assert!(matches!(err, Error::UnreachableK { .. }));
    }

    #[test]
    fn undirected_random_samples_are_connected() {
        let params = GenParams {
            directed: Some(false),
            ..GenParams::new(2, 3)
        };
        let inst = generate_instance(&Model::RandomDigraph { n: 8, m: 9 }, &params).unwrap();
        assert!(!inst.is_directed());
        assert_eq!(inst.reachable_terminals(), inst.terminals().len());
    }

    #[test]
    fn layered_dag_terminals_sit_in_the_last_layer() {
        let inst = generate_instance(&Model::LayeredDag { width: 3, depth: 3 }, &GenParams::new(1, 5)).unwrap();
        // pendant leaves hang one hop below the last layer
        assert_eq!(inst.root_eccentricity(), 4);
    }

    #[test]
    fn model_strings_round_trip() {
        for m in [
            Model::RandomDigraph { n: 5, m: 7 },
            Model::LayeredDag { width: 2, depth: 3 },
            Model::Grid { w: 3, h: 3 },
            Model::StarOfStars { branch: 2, leaf: 4 },
        ] {
            assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
        }
        assert!("triangle:n=3".parse::<Model>().is_err());
        assert!("grid:w=3".parse::<Model>().is_err());
    }
}
