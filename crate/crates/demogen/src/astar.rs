//! Shortest paths on an occupancy grid: 8-connected A* with an octile
//! heuristic. Diagonal moves are forbidden when either adjacent
//! orthogonal cell is blocked, so paths never cut corners.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use simworld::geom::Vec2;

use crate::grid::OccupancyGrid;

#[derive(Clone, Debug)]
pub struct GridPath {
    pub cells: Vec<(usize, usize)>,
    /// Total length in meters.
    pub cost: f64,
}

/// Min-heap entry ordered by f, then g, then cell index for determinism.
#[derive(PartialEq)]
struct Entry {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .partial_cmp(&self.f)
            .unwrap()
            .then(other.g.partial_cmp(&self.g).unwrap())
            .then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const MOVES: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

fn octile(grid: &OccupancyGrid, a: (usize, usize), b: (usize, usize)) -> f64 {
    let dx = (a.0 as f64 - b.0 as f64).abs();
    let dy = (a.1 as f64 - b.1 as f64).abs();
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    grid.res() * ((hi - lo) + SQRT_2 * lo)
}

/// Optimal grid path between two free cells, or `None` when disconnected.
pub fn astar_cells(
    grid: &OccupancyGrid,
    start: (usize, usize),
    goal: (usize, usize),
) -> Option<GridPath> {
    let (w, h) = (grid.width(), grid.height());
    if grid.is_blocked(start.0, start.1) || grid.is_blocked(goal.0, goal.1) {
        return None;
    }
    let at = |c: (usize, usize)| c.1 * w + c.0;
    let mut g = vec![f64::INFINITY; w * h];
    let mut parent = vec![usize::MAX; w * h];
    let mut open = BinaryHeap::new();
    g[at(start)] = 0.0;
    open.push(Entry {
        f: octile(grid, start, goal),
        g: 0.0,
        idx: at(start),
    });

    while let Some(Entry { g: got, idx, .. }) = open.pop() {
        if got > g[idx] {
            continue;
        }
        let cell = (idx % w, idx / w);
        if cell == goal {
            let mut cells = vec![cell];
            let mut cur = idx;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push((cur % w, cur / w));
            }
            cells.reverse();
            return Some(GridPath { cells, cost: got });
        }
        for (dx, dy) in MOVES {
            let (nx, ny) = (cell.0 as i64 + dx, cell.1 as i64 + dy);
            if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                continue;
            }
            let next = (nx as usize, ny as usize);
            if grid.is_blocked(next.0, next.1) {
                continue;
            }
            if dx != 0 && dy != 0 {
                let side_a = ((cell.0 as i64 + dx) as usize, cell.1);
                let side_b = (cell.0, (cell.1 as i64 + dy) as usize);
                if grid.is_blocked(side_a.0, side_a.1) || grid.is_blocked(side_b.0, side_b.1) {
                    continue;
                }
            }
            let step = if dx != 0 && dy != 0 {
                grid.res() * SQRT_2
            } else {
                grid.res()
            };
            let cand = got + step;
            if cand < g[at(next)] {
                g[at(next)] = cand;
                parent[at(next)] = idx;
                open.push(Entry {
                    f: cand + octile(grid, next, goal),
                    g: cand,
                    idx: at(next),
                });
            }
        }
    }
    None
}

/// Plans from one world point to another: snaps both to free cells, runs
/// A*, and returns cell-center waypoints ending at the exact goal point.
pub fn plan_astar(grid: &OccupancyGrid, start: Vec2, goal: Vec2) -> Option<Vec<Vec2>> {
    let s = grid.nearest_free_cell(start)?;
    let t = grid.nearest_free_cell(goal)?;
    let path = astar_cells(grid, s, t)?;
    let mut points: Vec<Vec2> = path.cells.iter().map(|&(x, y)| grid.center(x, y)).collect();
    points.push(goal);
    Some(points)
}
