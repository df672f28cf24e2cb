//! Grid A* over the composed costmap.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::Point2;

use crate::costmap::{Costmap, INSCRIBED};

pub const STRAIGHT: u64 = 1000;
pub const DIAGONAL: u64 = 1414;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("start is outside the grid")]
    StartOutside,
    #[error("goal is outside the grid")]
    GoalOutside,
    #[error("goal cell is not traversable")]
    GoalBlocked,
    #[error("no path to goal")]
    NoPath,
}

/// Cells at or above the inscribed cost (and the unknown sentinel) are walls.
pub fn traversable(cost: u8) -> bool {
    cost < INSCRIBED
}

/// Integer cost of stepping into a cell: geometric length plus the weighted
/// cell cost, both in millimetre-like units.
pub fn step_cost(diagonal: bool, cell_cost: u8, cost_weight: f64) -> u64 {
    let base = if diagonal { DIAGONAL } else { STRAIGHT };
    base + (cost_weight * 1000.0 * cell_cost as f64).round() as u64
}

pub const NEIGHBOURS: [(i64, i64); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

fn octile(a: (usize, usize), b: (usize, usize)) -> u64 {
    let dx = a.0.abs_diff(b.0) as u64;
    let dy = a.1.abs_diff(b.1) as u64;
    let (lo, hi) = (dx.min(dy), dx.max(dy));
    STRAIGHT * (hi - lo) + DIAGONAL * lo
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellPath {
    pub cells: Vec<(usize, usize)>,
    pub cost: u64,
}

/// A* between two cells. The start cell itself may be non-traversable so a
/// robot caught inside a cost bump can still leave it.
pub fn plan_cells(
    costmap: &Costmap,
    start: (usize, usize),
    goal: (usize, usize),
    cost_weight: f64,
) -> Result<CellPath, PlanError> {
    let spec = *costmap.spec();
    if !traversable(costmap.get(goal.0, goal.1)) {
        return Err(PlanError::GoalBlocked);
    }
    let n = spec.len();
    let mut g = vec![u64::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let s = spec.index(start.0, start.1);
    let t = spec.index(goal.0, goal.1);
    g[s] = 0;
    let mut open = BinaryHeap::new();
    open.push(Reverse((octile(start, goal), 0u64, s)));
    while let Some(Reverse((_, gs, k))) = open.pop() {
        if closed[k] || gs > g[k] {
            continue;
        }
        closed[k] = true;
        if k == t {
            break;
        }
        let (i, j) = (k % spec.width, k / spec.width);
        for (di, dj) in NEIGHBOURS {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni >= spec.width as i64 || nj >= spec.height as i64 {
                continue;
            }
            let (ni, nj) = (ni as usize, nj as usize);
            let c = costmap.get(ni, nj);
            if !traversable(c) {
                continue;
            }
            let nk = spec.index(ni, nj);
            let ng = gs + step_cost(di != 0 && dj != 0, c, cost_weight);
            if ng < g[nk] {
                g[nk] = ng;
                parent[nk] = k;
                let h = octile((ni, nj), goal);
                open.push(Reverse((ng + h, ng, nk)));
            }
        }
    }
    if g[t] == u64::MAX {
        return Err(PlanError::NoPath);
    }
    let mut cells = vec![goal];
    let mut k = t;
    while k != s {
        k = parent[k];
        cells.push((k % spec.width, k / spec.width));
    }
    cells.reverse();
    Ok(CellPath { cells, cost: g[t] })
}

/// World-frame waypoints: cell centres, ending exactly at `goal`.
pub fn plan_path(
    costmap: &Costmap,
    start: Point2<f64>,
    goal: Point2<f64>,
    cost_weight: f64,
) -> Result<Vec<Point2<f64>>, PlanError> {
    let spec = costmap.spec();
    let s = spec.world_to_cell(start).ok_or(PlanError::StartOutside)?;
    let t = spec.world_to_cell(goal).ok_or(PlanError::GoalOutside)?;
    let path = plan_cells(costmap, s, t, cost_weight)?;
    let mut pts: Vec<Point2<f64>> = path.cells.iter().skip(1).map(|&(i, j)| spec.cell_center(i, j)).collect();
    pts.pop();
    pts.push(goal);
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmap::{GridSpec, LETHAL};

    #[test]
    fn straight_corridor() {
        let map = Costmap::new(GridSpec::new(0.0, 0.0, 1.0, 10, 3));
        let p = plan_cells(&map, (0, 1), (9, 1), 0.02).unwrap();
        assert_eq!(p.cells.len(), 10);
        assert!(p.cells.iter().all(|&(_, j)| j == 1));
        assert_eq!(p.cost, 9 * STRAIGHT);
    }

    #[test]
    fn blocked_goal_and_enclosure() {
        let mut map = Costmap::new(GridSpec::new(0.0, 0.0, 1.0, 9, 9));
        map.set(4, 4, LETHAL);
        assert_eq!(plan_cells(&map, (0, 0), (4, 4), 0.02), Err(PlanError::GoalBlocked));
        let mut ring = Costmap::new(GridSpec::new(0.0, 0.0, 1.0, 9, 9));
        for k in 2..=6 {
            for (i, j) in [(k, 2), (k, 6), (2, k), (6, k)] {
                ring.set(i, j, LETHAL);
            }
        }
        assert_eq!(plan_cells(&ring, (0, 0), (4, 4), 0.02), Err(PlanError::NoPath));
    }

    #[test]
    fn waypoints_end_on_goal() {
        let map = Costmap::new(GridSpec::new(0.0, 0.0, 0.1, 20, 20));
        let goal = Point2::new(1.52, 0.33);
        let w = plan_path(&map, Point2::new(0.05, 0.05), goal, 0.02).unwrap();
        assert_eq!(*w.last().unwrap(), goal);
        assert_eq!(plan_path(&map, Point2::new(-1.0, 0.0), goal, 0.02), Err(PlanError::StartOutside));
    }
}
