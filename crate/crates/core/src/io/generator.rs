//! Seeded synthetic instances: uniform random sites in a square, Euclidean
//! distances, range-feasible expanded graph, distance-mixed OD pairs.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, InstanceError};
use crate::network::{
    apply_refuel_surcharge, build_expanded_graph, Connection, NetworkError, NodeRole, OdPair, RangeParams,
};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub stations: usize,
    pub terminals: usize,
    /// Number of OD pairs sampled before infeasible ones are dropped.
    pub pairs: usize,
    /// Side length of the square the sites are drawn from.
    pub box_size: f64,
    pub speed: f64,
    pub r_max: f64,
    pub lambda: f64,
    /// Uniform station capacity; infinite for none.
    pub kappa: f64,
    /// Demands are drawn uniformly from `1..=max_demand`.
    pub max_demand: u32,
    /// Sampling weights of short, medium and long pairs (distance terciles).
    pub mix: [f64; 3],
    /// Full-refuel time; adds `T * ell / r_max` to arcs into stations.
    pub refuel_time: Option<f64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            stations: 12,
            terminals: 6,
            pairs: 8,
            box_size: 100.0,
            speed: 1.0,
            r_max: 80.0,
            lambda: 0.1,
            kappa: f64::INFINITY,
            max_demand: 1,
            mix: [0.7, 0.2, 0.1],
            refuel_time: None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("at least one station is required")]
    NoStations,
    #[error("at least two terminals are required, got {0}")]
    TooFewTerminals(usize),
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if self.stations == 0 {
            return Err(GeneratorError::NoStations);
        }
        if self.terminals < 2 {
            return Err(GeneratorError::TooFewTerminals(self.terminals));
        }
        let checks = [
            (
                "box_size",
                self.box_size,
                self.box_size > 0.0 && self.box_size.is_finite(),
            ),
            ("speed", self.speed, self.speed > 0.0 && self.speed.is_finite()),
            ("r_max", self.r_max, self.r_max > 0.0 && self.r_max.is_finite()),
            ("lambda", self.lambda, self.lambda >= 0.0 && self.lambda.is_finite()),
            ("kappa", self.kappa, self.kappa >= 0.0),
            ("max_demand", self.max_demand as f64, self.max_demand >= 1),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(GeneratorError::InvalidParameter { name, value });
            }
        }
        if self.mix.iter().any(|w| !(*w >= 0.0)) || self.mix.iter().sum::<f64>() <= 0.0 {
            return Err(GeneratorError::InvalidParameter {
                name: "mix",
                value: self.mix.iter().sum(),
            });
        }
        Ok(())
    }
}

/// Deterministic for a fixed configuration. Terminals get labels
/// `0..terminals`, stations follow. Pairs without a time-feasible path are
/// dropped.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance, GeneratorError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.terminals + config.stations;
    let nodes: Vec<(u64, NodeRole)> = (0..n)
        .map(|i| {
            let role = if i < config.terminals {
                NodeRole::Terminal
            } else {
                NodeRole::Station
            };
            (i as u64, role)
        })
        .collect();
    let points: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.0..config.box_size), rng.gen_range(0.0..config.box_size)))
        .collect();
    let dist = |i: usize, j: usize| {
        let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
        (dx * dx + dy * dy).sqrt()
    };
    let table: Vec<Vec<Option<Connection>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (i != j).then(|| Connection {
                        tau: dist(i, j) / config.speed,
                        ell: dist(i, j),
                    })
                })
                .collect()
        })
        .collect();
    let ranges = RangeParams::half_capacity(config.r_max);
    let mut graph = build_expanded_graph(&nodes, &table, &ranges)?;
    if let Some(t) = config.refuel_time {
        graph = apply_refuel_surcharge(&graph, t, config.r_max)?;
    }

    let mut candidates: Vec<(usize, usize)> = (0..config.terminals)
        .flat_map(|s| (0..config.terminals).filter(move |&t| t != s).map(move |t| (s, t)))
        .collect();
    candidates.sort_by(|a, b| dist(a.0, a.1).total_cmp(&dist(b.0, b.1)).then(a.cmp(b)));
    let third = candidates.len().div_ceil(3);
    let mut terciles: Vec<Vec<(usize, usize)>> = candidates.chunks(third.max(1)).map(|c| c.to_vec()).collect();
    terciles.resize(3, Vec::new());
    let mut chosen = Vec::new();
    while chosen.len() < config.pairs && terciles.iter().any(|t| !t.is_empty()) {
        let weights: Vec<f64> = (0..3)
            .map(|k| if terciles[k].is_empty() { 0.0 } else { config.mix[k] })
            .collect();
        let k = match WeightedIndex::new(&weights) {
            Ok(w) => w.sample(&mut rng),
            Err(_) => (0..3)
                .find(|&k| !terciles[k].is_empty())
                .expect("some tercile is nonempty"),
        };
        if terciles[k].is_empty() {
            continue;
        }
        let idx = rng.gen_range(0..terciles[k].len());
        chosen.push(terciles[k].swap_remove(idx));
    }
    chosen.shuffle(&mut rng);

    let conventional: Vec<f64> = chosen.iter().map(|&(s, t)| dist(s, t) / config.speed).collect();
    let pairs = chosen
        .iter()
        .map(|&(s, t)| OdPair {
            origin: s,
            dest: t,
            demand: rng.gen_range(1..=config.max_demand) as f64,
            time_bound: 1.0,
        })
        .collect();
    let cost = (0..n).map(|i| if i < config.terminals { 0.0 } else { 1.0 }).collect();
    let capacity = vec![config.kappa; n];
    let mut inst = Instance::new(graph, ranges, pairs, cost, capacity)?;
    inst.compute_time_bounds(config.lambda, &conventional)?;
    Ok(inst.drop_infeasible_pairs().0)
}
