//! Reference pathfinding on 4-connected grids.
//!
//! Dijkstra and A* produce the ground-truth shortest paths; DFS reproduces
//! the fixed stack discipline used by the DFS-guided prompt, so the prompt's
//! stated procedure and the scripted reference stay in lockstep. All solvers
//! break ties deterministically (stable priority queue, neighbors expanded in
//! `MOVE_ORDER`), so reference paths are byte-for-byte reproducible.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Coord, GridWorld};

/// Neighbor expansion order: Right, Left, Down, Up.
pub const MOVE_ORDER: [(i32, i32); 4] = [(0, 1), (0, -1), (1, 0), (-1, 0)];

/// A feasible route: consecutive points differ by exactly one unit step in
/// one axis. A single-point path represents start = end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub points: Vec<Coord>,
}

impl Path {
    pub fn new(points: Vec<Coord>) -> Self {
        debug_assert!(!points.is_empty());
        Path { points }
    }

    /// Number of unit moves: point count minus one. A `Path` is never empty
    /// (empty candidates live in the evaluation module), so this is total.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    /// "[(x1, y1), (x2, y2), ...]" — the output format the prompts request.
    pub fn to_text(&self) -> String {
        format_points(&self.points)
    }
}

pub fn format_points(points: &[Coord]) -> String {
    let inner: Vec<String> = points.iter().map(|c| c.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("invalid endpoint {0}: out of bounds or blocked")]
    InvalidEndpoint(Coord),
}

fn check_endpoints(world: &GridWorld, start: Coord, end: Coord) -> Result<(), SolverError> {
    for c in [start, end] {
        if !world.is_free(c) {
            return Err(SolverError::InvalidEndpoint(c));
        }
    }
    Ok(())
}

fn index(world: &GridWorld, c: Coord) -> usize {
    (c.x * world.n_size + c.y) as usize
}

fn reconstruct(parents: &[Option<Coord>], world: &GridWorld, start: Coord, end: Coord) -> Path {
    let mut points = vec![end];
    let mut cur = end;
    while cur != start {
        cur = parents[index(world, cur)].expect("parent chain reaches start");
        points.push(cur);
    }
    points.reverse();
    Path::new(points)
}

/// Shortest path by Dijkstra over free in-bounds 4-neighbors, unit edge cost.
/// Ties pop in insertion order; neighbors relax in `MOVE_ORDER`.
pub fn dijkstra_shortest(
    world: &GridWorld,
    start: Coord,
    end: Coord,
) -> Result<Option<Path>, SolverError> {
    shortest_impl(world, start, end, false)
}

/// A* with the Manhattan heuristic. Same lengths as Dijkstra on every
/// solvable instance; goal test on pop.
pub fn astar_shortest(
    world: &GridWorld,
    start: Coord,
    end: Coord,
) -> Result<Option<Path>, SolverError> {
    shortest_impl(world, start, end, true)
}

fn shortest_impl(
    world: &GridWorld,
    start: Coord,
    end: Coord,
    use_heuristic: bool,
) -> Result<Option<Path>, SolverError> {
    check_endpoints(world, start, end)?;
    let n_cells = (world.n_size * world.n_size) as usize;
    let mut dist: Vec<u32> = vec![u32::MAX; n_cells];
    let mut parents: Vec<Option<Coord>> = vec![None; n_cells];
    let mut settled = vec![false; n_cells];
    // (priority, insertion seq, cell): equal priorities pop in insertion order.
    type HeapEntry = Reverse<(u32, u64, (i32, i32))>;
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut seq: u64 = 0;
    let h = |c: Coord| if use_heuristic { c.manhattan(end) } else { 0 };

    dist[index(world, start)] = 0;
    heap.push(Reverse((h(start), seq, (start.x, start.y))));
    while let Some(Reverse((_, _, (cx, cy)))) = heap.pop() {
        let cur = Coord::new(cx, cy);
        let ci = index(world, cur);
        if settled[ci] {
            continue;
        }
        settled[ci] = true;
        if cur == end {
            return Ok(Some(reconstruct(&parents, world, start, end)));
        }
        let g = dist[ci];
        for (dx, dy) in MOVE_ORDER {
            let nb = Coord::new(cur.x + dx, cur.y + dy);
            if !world.is_free(nb) {
                continue;
            }
            let ni = index(world, nb);
            if settled[ni] || g + 1 >= dist[ni] {
                continue;
            }
            dist[ni] = g + 1;
            parents[ni] = Some(cur);
            seq += 1;
            heap.push(Reverse((g + 1 + h(nb), seq, (nb.x, nb.y))));
        }
    }
    Ok(None)
}

/// Depth-first search with the prompt's exact stack discipline: pop; return
/// when the popped cell is the endpoint; mark visited on pop; push unvisited
/// valid neighbors in `MOVE_ORDER` (FILO, so Up is explored first).
/// Deterministic and feasible, generally non-optimal.
pub fn dfs_first_path(
    world: &GridWorld,
    start: Coord,
    end: Coord,
) -> Result<Option<Path>, SolverError> {
    check_endpoints(world, start, end)?;
    let n_cells = (world.n_size * world.n_size) as usize;
    let mut visited = vec![false; n_cells];
    let mut stack: Vec<(Coord, Vec<Coord>)> = vec![(start, vec![start])];
    while let Some((cur, path)) = stack.pop() {
        if cur == end {
            return Ok(Some(Path::new(path)));
        }
        let ci = index(world, cur);
        if visited[ci] {
            continue;
        }
        visited[ci] = true;
        for (dx, dy) in MOVE_ORDER {
            let nb = Coord::new(cur.x + dx, cur.y + dy);
            if !world.is_free(nb) || visited[index(world, nb)] {
                continue;
            }
            let mut next = path.clone();
            next.push(nb);
            stack.push((nb, next));
        }
    }
    Ok(None)
}

/// Reachability through free in-bounds 4-neighbors.
pub fn bfs_connected(world: &GridWorld, a: Coord, b: Coord) -> Result<bool, SolverError> {
    check_endpoints(world, a, b)?;
    if a == b {
        return Ok(true);
    }
    let n_cells = (world.n_size * world.n_size) as usize;
    let mut seen = vec![false; n_cells];
    let mut queue = std::collections::VecDeque::new();
    seen[index(world, a)] = true;
    queue.push_back(a);
    while let Some(cur) = queue.pop_front() {
        for (dx, dy) in MOVE_ORDER {
            let nb = Coord::new(cur.x + dx, cur.y + dy);
            if !world.is_free(nb) || seen[index(world, nb)] {
                continue;
            }
            if nb == b {
                return Ok(true);
            }
            seen[index(world, nb)] = true;
            queue.push_back(nb);
        }
    }
    Ok(false)
}
