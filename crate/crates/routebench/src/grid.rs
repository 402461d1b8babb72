//! Benchmark environments: obstacle grids and origin/destination sampling.
//!
//! An environment is an N×N grid with `n` non-overlapping s×s square
//! obstacles. Endpoint pairs must be at least 30% of the grid diagonal apart
//! (Euclidean, between cell centers) and connected through free 4-neighbors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{purpose, Rng};
use crate::solvers;

/// A cell position. `x` is the row index, `y` the column index, 0-based.
///
/// Out-of-bounds and negative coordinates are representable on purpose:
/// candidate paths returned by a model may leave the grid and the validator
/// has to talk about those cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub fn new(x: i32, y: i32) -> Self {
        Coord { x, y }
    }

    pub fn manhattan(self, other: Coord) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn euclidean(self, other: Coord) -> f64 {
        let dx = (self.x - other.x) as f64;
        let dy = (self.y - other.y) as f64;
        (dx * dx + dy * dy).sqrt()
    }
}

impl std::fmt::Display for Coord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned rectangular obstacle, inclusive on both corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obstacle {
    pub top_left: Coord,
    pub bottom_right: Coord,
}

impl Obstacle {
    pub fn new(top_left: Coord, bottom_right: Coord) -> Self {
        debug_assert!(top_left.x <= bottom_right.x && top_left.y <= bottom_right.y);
        Obstacle { top_left, bottom_right }
    }

    /// Square obstacle of side `s` with the given top-left corner.
    pub fn square(top_left: Coord, side: i32) -> Self {
        Obstacle {
            top_left,
            bottom_right: Coord::new(top_left.x + side - 1, top_left.y + side - 1),
        }
    }

    pub fn contains(&self, c: Coord) -> bool {
        self.top_left.x <= c.x
            && c.x <= self.bottom_right.x
            && self.top_left.y <= c.y
            && c.y <= self.bottom_right.y
    }

    pub fn overlaps(&self, other: &Obstacle) -> bool {
        self.top_left.x <= other.bottom_right.x
            && other.top_left.x <= self.bottom_right.x
            && self.top_left.y <= other.bottom_right.y
            && other.top_left.y <= self.bottom_right.y
    }

    pub fn cells(&self) -> impl Iterator<Item = Coord> + '_ {
        (self.top_left.x..=self.bottom_right.x).flat_map(move |x| {
            (self.top_left.y..=self.bottom_right.y).map(move |y| Coord::new(x, y))
        })
    }
}

/// One benchmark environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridWorld {
    pub n_size: i32,
    pub obstacles: Vec<Obstacle>,
    pub seed: u64,
}

impl GridWorld {
    pub fn new(n_size: i32, obstacles: Vec<Obstacle>, seed: u64) -> Self {
        GridWorld { n_size, obstacles, seed }
    }

    pub fn in_bounds(&self, c: Coord) -> bool {
        0 <= c.x && c.x < self.n_size && 0 <= c.y && c.y < self.n_size
    }

    /// True iff `c` lies inside any obstacle rectangle (inclusive bounds).
    /// Out-of-bounds cells are simply not obstacles.
    pub fn is_obstacle(&self, c: Coord) -> bool {
        self.obstacles.iter().any(|o| o.contains(c))
    }

    /// In bounds and not inside an obstacle.
    pub fn is_free(&self, c: Coord) -> bool {
        self.in_bounds(c) && !self.is_obstacle(c)
    }
}

/// One origin/destination task with its ground-truth shortest path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskCase {
    pub case_id: String,
    pub env_index: u32,
    pub start: Coord,
    pub end: Coord,
    pub reference_path: Vec<Coord>,
    pub optimal_len: u32,
}

/// Generation parameters for one suite of environments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n_size: i32,
    pub n_obstacles: u32,
    pub obstacle_side: i32,
    pub envs_per_config: u32,
    pub pairs_per_env: u32,
    pub seed: u64,
}

impl SuiteConfig {
    /// The three standard configurations, keyed by grid size.
    /// 20 environments × 5 pairs gives 100 cases per configuration.
    pub fn standard(n_size: i32, seed: u64) -> Option<SuiteConfig> {
        let (n_obstacles, obstacle_side) = match n_size {
            10 => (2, 3),
            20 => (3, 4),
            30 => (4, 5),
            _ => return None,
        };
        Some(SuiteConfig {
            n_size,
            n_obstacles,
            obstacle_side,
            envs_per_config: 20,
            pairs_per_env: 5,
            seed,
        })
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let free = (self.n_size as i64) * (self.n_size as i64)
            - (self.n_obstacles as i64) * (self.obstacle_side as i64) * (self.obstacle_side as i64);
        if self.n_size <= 0 || self.obstacle_side <= 0 || self.obstacle_side > self.n_size {
            return Err(GenError::InvalidConfig(format!(
                "obstacle side {} does not fit grid size {}",
                self.obstacle_side, self.n_size
            )));
        }
        if free < 0 {
            return Err(GenError::InvalidConfig(format!(
                "{} obstacles of side {} exceed a {0}x{0} grid",
                self.n_obstacles, self.obstacle_side
            )));
        }
        Ok(())
    }
}

/// Minimum endpoint separation: 30% of the Euclidean distance between the
/// corner cell centers (0,0) and (N-1,N-1).
pub fn min_pair_distance(n_size: i32) -> f64 {
    0.3 * std::f64::consts::SQRT_2 * (n_size - 1) as f64
}

const MAX_ATTEMPTS: u32 = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid suite config: {0}")]
    InvalidConfig(String),
    #[error("env {env_index}: failed to place {placed} disjoint obstacles after {attempts} attempts")]
    PlacementExhausted { env_index: u32, placed: u32, attempts: u32 },
    #[error("env {env_index}: failed to sample a valid endpoint pair after {attempts} attempts")]
    SamplingExhausted { env_index: u32, attempts: u32 },
}

/// Place `n` disjoint square obstacles by rejection sampling of top-left
/// corners uniform over [0, N-s]^2. Deterministic for a fixed (seed, env_index).
pub fn generate_environment(config: &SuiteConfig, env_index: u32) -> Result<GridWorld, GenError> {
    config.validate()?;
    let mut rng = Rng::stream(config.seed, purpose::OBSTACLES, env_index as u64);
    let span = (config.n_size - config.obstacle_side + 1) as u64;
    let mut obstacles: Vec<Obstacle> = Vec::with_capacity(config.n_obstacles as usize);
    for _ in 0..config.n_obstacles {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let tx = rng.below(span) as i32;
            let ty = rng.below(span) as i32;
            let cand = Obstacle::square(Coord::new(tx, ty), config.obstacle_side);
            if obstacles.iter().all(|o| !o.overlaps(&cand)) {
                obstacles.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(GenError::PlacementExhausted {
                env_index,
                placed: obstacles.len() as u32,
                attempts: MAX_ATTEMPTS,
            });
        }
    }
    Ok(GridWorld::new(config.n_size, obstacles, config.seed))
}

/// Sample `k` origin/destination pairs. Both endpoints free, separated by at
/// least `min_pair_distance`, and BFS-connected. Endpoints may repeat across
/// pairs; start and end of one pair always differ.
pub fn sample_endpoint_pairs(
    world: &GridWorld,
    k: u32,
    seed: u64,
    env_index: u32,
) -> Result<Vec<(Coord, Coord)>, GenError> {
    let mut rng = Rng::stream(seed, purpose::ENDPOINTS, env_index as u64);
    let threshold = min_pair_distance(world.n_size);
    let n = world.n_size as u64;
    let mut pairs = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let mut found = None;
        for _ in 0..MAX_ATTEMPTS {
            let start = Coord::new(rng.below(n) as i32, rng.below(n) as i32);
            let end = Coord::new(rng.below(n) as i32, rng.below(n) as i32);
            if start == end || world.is_obstacle(start) || world.is_obstacle(end) {
                continue;
            }
            if start.euclidean(end) < threshold {
                continue;
            }
            if !solvers::bfs_connected(world, start, end).unwrap_or(false) {
                continue;
            }
            found = Some((start, end));
            break;
        }
        match found {
            Some(p) => pairs.push(p),
            None => {
                return Err(GenError::SamplingExhausted { env_index, attempts: MAX_ATTEMPTS })
            }
        }
    }
    Ok(pairs)
}

/// A fully generated benchmark suite for one configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suite {
    pub schema_version: u32,
    pub config: SuiteConfig,
    pub environments: Vec<SuiteEnv>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteEnv {
    pub env_index: u32,
    pub world: GridWorld,
    pub cases: Vec<TaskCase>,
}

pub const SUITE_SCHEMA_VERSION: u32 = 1;

impl Suite {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serialization")
    }

    pub fn from_json(text: &str) -> Result<Suite, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn cases(&self) -> impl Iterator<Item = (&GridWorld, &TaskCase)> {
        self.environments
            .iter()
            .flat_map(|e| e.cases.iter().map(move |c| (&e.world, c)))
    }

    pub fn n_cases(&self) -> usize {
        self.environments.iter().map(|e| e.cases.len()).sum()
    }

    pub fn find_case(&self, case_id: &str) -> Option<(&GridWorld, &TaskCase)> {
        self.cases().find(|(_, c)| c.case_id == case_id)
    }
}

fn build_env(config: &SuiteConfig, env_index: u32) -> Result<SuiteEnv, GenError> {
    let world = generate_environment(config, env_index)?;
    let pairs = sample_endpoint_pairs(&world, config.pairs_per_env, config.seed, env_index)?;
    let mut cases = Vec::with_capacity(pairs.len());
    for (pair_index, (start, end)) in pairs.into_iter().enumerate() {
        let path = solvers::dijkstra_shortest(&world, start, end)
            .expect("sampled endpoints are free")
            .expect("sampled endpoints are connected");
        let optimal_len = path.len() as u32;
        cases.push(TaskCase {
            case_id: format!("n{}-e{:03}-c{}", config.n_size, env_index, pair_index),
            env_index,
            start,
            end,
            reference_path: path.points,
            optimal_len,
        });
    }
    Ok(SuiteEnv { env_index, world, cases })
}

/// Generate the full suite: `envs_per_config` environments, each with
/// `pairs_per_env` cases carrying the Dijkstra reference path. Deterministic
/// under (config, seed); environments are independent and built in parallel
/// when the `parallel` feature is enabled.
pub fn build_suite(config: &SuiteConfig) -> Result<Suite, GenError> {
    config.validate()?;
    let indices: Vec<u32> = (0..config.envs_per_config).collect();
    let environments =
        crate::par::try_map(indices, |env_index| build_env(config, env_index))?;
    Ok(Suite {
        schema_version: SUITE_SCHEMA_VERSION,
        config: config.clone(),
        environments,
    })
}
