//! Slow reference computations shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::Point2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use socnav::costmap::{Costmap, GridSpec, InflationParams, LayerStack, LETHAL, UNKNOWN};
use socnav::geometry::Pose2D;
use socnav::social_field::{global_field, GaussianParams, GroupSpaceModel, GroupState, PersonState, SceneState};

pub fn random_scene(rng: &mut ChaCha8Rng, extent: f64) -> SceneState {
    let n = rng.gen_range(0..7);
    let persons: Vec<PersonState> = (0..n)
        .map(|k| {
            let params = GaussianParams::new(
                rng.gen_range(50.0..254.0),
                rng.gen_range(0.2..1.4),
                rng.gen_range(0.2..0.8),
                rng.gen_range(0.2..0.6),
                rng.gen_range(0.2..0.6),
            );
            PersonState::new(
                format!("p{k}"),
                Pose2D::new(
                    rng.gen_range(-1.0..extent + 1.0),
                    rng.gen_range(-1.0..extent + 1.0),
                    rng.gen_range(-3.2..3.2),
                ),
                params,
            )
        })
        .collect();
    let mut groups = Vec::new();
    if persons.len() >= 3 {
        let members: Vec<&PersonState> = persons.iter().take(3).collect();
        groups.push(GroupState::from_members("g", &members, &GroupSpaceModel::default()).unwrap());
    }
    SceneState::new(persons, groups).unwrap()
}

pub fn random_static(rng: &mut ChaCha8Rng, spec: GridSpec) -> Costmap {
    let mut m = Costmap::new(spec);
    for _ in 0..rng.gen_range(0..6) {
        // wall segment
        let (i, j) = (rng.gen_range(0..spec.width), rng.gen_range(0..spec.height));
        let len = rng.gen_range(1..30);
        let horizontal = rng.gen_bool(0.5);
        for k in 0..len {
            let (a, b) = if horizontal { (i + k, j) } else { (i, j + k) };
            if a < spec.width && b < spec.height {
                m.set(a, b, LETHAL);
            }
        }
    }
    for _ in 0..rng.gen_range(0..40) {
        let (i, j) = (rng.gen_range(0..spec.width), rng.gen_range(0..spec.height));
        m.set(i, j, if rng.gen_bool(0.3) { UNKNOWN } else { rng.gen_range(0..200) });
    }
    m
}

fn oracle_inflation(d: f64, p: &InflationParams) -> u8 {
    if d == 0.0 {
        254
    } else if d <= p.inscribed_radius {
        253
    } else {
        (252.0 * (-p.decay_rate * (d - p.inscribed_radius)).exp() + 0.5).floor() as u8
    }
}

/// Every cell computed on its own from the layer definitions.
pub fn brute_force(stack: &LayerStack, scene: &SceneState) -> Costmap {
    let spec = stack.spec;
    let mut out = Costmap::new(spec);
    let cell_of = |p: Point2<f64>| -> Option<(usize, usize)> {
        let i = ((p.x - spec.origin_x) / spec.resolution).floor();
        let j = ((p.y - spec.origin_y) / spec.resolution).floor();
        (i >= 0.0 && j >= 0.0 && i < spec.width as f64 && j < spec.height as f64).then_some((i as usize, j as usize))
    };
    let center = |i: usize, j: usize| {
        Point2::new(
            spec.origin_x + (i as f64 + 0.5) * spec.resolution,
            spec.origin_y + (j as f64 + 0.5) * spec.resolution,
        )
    };
    let obstacle_cells: Vec<(usize, usize)> = stack.obstacles.iter().filter_map(|p| cell_of(*p)).collect();
    // static + obstacles, then clearing around people
    let mut base = vec![0u8; spec.width * spec.height];
    for j in 0..spec.height {
        for i in 0..spec.width {
            let mut c = stack.static_map.as_ref().map_or(0, |m| m.get(i, j));
            if obstacle_cells.contains(&(i, j)) {
                c = LETHAL;
            }
            if let Some(r) = stack.clearing_radius {
                if c == LETHAL && scene.persons.iter().any(|p| (center(i, j) - p.position()).norm() <= r) {
                    c = 0;
                }
            }
            base[j * spec.width + i] = c;
        }
    }
    let lethal: Vec<(usize, usize)> = (0..spec.len())
        .filter(|k| base[*k] == LETHAL)
        .map(|k| (k % spec.width, k / spec.width))
        .collect();
    for j in 0..spec.height {
        for i in 0..spec.width {
            let mut c = base[j * spec.width + i];
            if let Some(p) = &stack.inflation {
                if c != LETHAL && c != UNKNOWN && !lethal.is_empty() {
                    let d = lethal
                        .iter()
                        .map(|&(a, b)| {
                            let dx = a as f64 - i as f64;
                            let dy = b as f64 - j as f64;
                            (dx * dx + dy * dy).sqrt() * spec.resolution
                        })
                        .fold(f64::INFINITY, f64::min);
                    c = c.max(oracle_inflation(d, p));
                }
            }
            if stack.adaptive {
                let f = (global_field(scene, center(i, j)) + 0.5).floor() as u8;
                c = c.max(f);
            }
            out.set(i, j, c);
        }
    }
    out
}

pub fn step(diagonal: bool, c: u8, w: f64) -> u64 {
    (if diagonal { 1414 } else { 1000 }) + (w * 1000.0 * c as f64).round() as u64
}

/// Plain Dijkstra, no heuristic.
pub fn dijkstra(map: &Costmap, start: (usize, usize), goal: (usize, usize), w: f64) -> Option<u64> {
    let spec = map.spec();
    let (wd, ht) = (spec.width as i64, spec.height as i64);
    if map.get(goal.0, goal.1) >= 253 {
        return None;
    }
    let mut dist = vec![u64::MAX; spec.len()];
    let idx = |i: i64, j: i64| (j * wd + i) as usize;
    dist[idx(start.0 as i64, start.1 as i64)] = 0;
    let mut heap = BinaryHeap::from([Reverse((0u64, start.0 as i64, start.1 as i64))]);
    while let Some(Reverse((d, i, j))) = heap.pop() {
        if d > dist[idx(i, j)] {
            continue;
        }
        for di in -1..=1i64 {
            for dj in -1..=1i64 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= wd || b >= ht {
                    continue;
                }
                let c = map.get(a as usize, b as usize);
                if c >= 253 {
                    continue;
                }
                let nd = d + step(di != 0 && dj != 0, c, w);
                if nd < dist[idx(a, b)] {
                    dist[idx(a, b)] = nd;
                    heap.push(Reverse((nd, a, b)));
                }
            }
        }
    }
    let d = dist[idx(goal.0 as i64, goal.1 as i64)];
    (d != u64::MAX).then_some(d)
}

