use nalgebra::Point2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Costmap, GridSpec, FREE, INSCRIBED, LETHAL, UNKNOWN};
use crate::social_field::SceneState;

pub fn round_half_up(x: f64) -> u8 {
    (x + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Marks every in-bounds point lethal.
pub fn mark_obstacles(costmap: &mut Costmap, points: &[Point2<f64>]) {
    for p in points {
        if let Some((i, j)) = costmap.spec().world_to_cell(*p) {
            costmap.set(i, j, LETHAL);
        }
    }
}

/// Clears lethal marks produced by people themselves so that only their
/// social field remains once inflation has run.
pub fn clean_people(costmap: &mut Costmap, scene: &SceneState, clearing_radius: f64) {
    let spec = *costmap.spec();
    let r2 = clearing_radius * clearing_radius;
    for person in &scene.persons {
        let c = person.position();
        let Some(((i0, j0), (i1, j1))) = spec.cell_window(c, clearing_radius) else {
            continue;
        };
        for j in j0..=j1 {
            for i in i0..=i1 {
                if costmap.get(i, j) == LETHAL && (spec.cell_center(i, j) - c).norm_squared() <= r2 {
                    costmap.set(i, j, FREE);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InflationParams {
    pub inscribed_radius: f64,
    pub decay_rate: f64,
}

impl Default for InflationParams {
    fn default() -> Self {
        Self {
            inscribed_radius: 0.4,
            decay_rate: 3.0,
        }
    }
}

/// Cost at distance `d` from the nearest lethal cell.
pub fn inflation_cost(d: f64, inscribed_radius: f64, decay_rate: f64) -> u8 {
    if d <= 0.0 {
        LETHAL
    } else if d <= inscribed_radius {
        INSCRIBED
    } else {
        round_half_up(252.0 * (-decay_rate * (d - inscribed_radius)).exp())
    }
}

const FAR: f64 = 1e20;

/// One-dimensional squared distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                break;
            }
        }
        if s <= z[k] {
            v[0] = q;
            z[1] = f64::INFINITY;
            continue;
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance (in cells) to the nearest lethal cell.
fn squared_distance_field(costmap: &Costmap) -> Vec<f64> {
    let spec = costmap.spec();
    let (w, h) = (spec.width, spec.height);
    let mut grid: Vec<f64> = costmap
        .cells()
        .iter()
        .map(|&c| if c == LETHAL { 0.0 } else { FAR })
        .collect();

    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    for i in 0..w {
        for j in 0..h {
            f[j] = grid[j * w + i];
        }
        edt_1d(&f[..h], &mut out[..h], &mut v, &mut z);
        for j in 0..h {
            grid[j * w + i] = out[j];
        }
    }
    for j in 0..h {
        let row = &mut grid[j * w..(j + 1) * w];
        f[..w].copy_from_slice(row);
        edt_1d(&f[..w], &mut out[..w], &mut v, &mut z);
        row.copy_from_slice(&out[..w]);
    }
    grid
}

/// Spreads decaying cost around lethal cells, combined by maximum.
pub fn inflate(costmap: &mut Costmap, params: &InflationParams) {
    if costmap.count(LETHAL) == 0 {
        return;
    }
    let res = costmap.spec().resolution;
    let dist2 = squared_distance_field(costmap);
    for (cell, d2) in costmap.cells_mut().iter_mut().zip(dist2) {
        if *cell == LETHAL || *cell == UNKNOWN {
            continue;
        }
        let c = inflation_cost(d2.sqrt() * res, params.inscribed_radius, params.decay_rate);
        *cell = (*cell).max(c);
    }
}

/// Radius beyond which a Gaussian of this amplitude and largest deviation
/// quantizes to zero.
pub fn adaptive_support_radius(amplitude: f64, max_sigma: f64) -> f64 {
    if amplitude < 0.5 {
        return 0.0;
    }
    2.0 * max_sigma * (2.0 * amplitude).ln().sqrt()
}

/// Writes the global social field into the grid (max-combined, rounded).
pub fn apply_adaptive_layer(costmap: &mut Costmap, scene: &SceneState) {
    let spec = *costmap.spec();

    struct Source<'a> {
        window: ((usize, usize), (usize, usize)),
        eval: Box<dyn Fn(Point2<f64>) -> f64 + Sync + 'a>,
    }

    let mut sources: Vec<Source> = Vec::new();
    for p in &scene.persons {
        let r = adaptive_support_radius(p.params.amplitude, p.params.max_sigma()) + spec.resolution;
        if let Some(window) = spec.cell_window(p.position(), r) {
            sources.push(Source {
                window,
                eval: Box::new(move |q| p.field_at(q)),
            });
        }
    }
    for g in &scene.groups {
        let r = adaptive_support_radius(g.params.amplitude, g.params.max_sigma()) + spec.resolution;
        if let Some(window) = spec.cell_window(g.center, r) {
            sources.push(Source {
                window,
                eval: Box::new(move |q| g.field_at(q)),
            });
        }
    }
    if sources.is_empty() {
        return;
    }

    costmap
        .cells_mut()
        .par_chunks_mut(spec.width)
        .enumerate()
        .for_each(|(j, row)| {
            for s in &sources {
                let ((i0, j0), (i1, j1)) = s.window;
                if j < j0 || j > j1 {
                    continue;
                }
                for (i, cell) in row.iter_mut().enumerate().take(i1 + 1).skip(i0) {
                    let v = round_half_up((s.eval)(spec.cell_center(i, j)));
                    if v > *cell {
                        *cell = v;
                    }
                }
            }
        });
}

/// Ordered layer configuration: static, obstacles, clean people,
/// inflation, adaptive.
#[derive(Debug, Clone)]
pub struct LayerStack {
    pub spec: GridSpec,
    pub static_map: Option<Costmap>,
    pub obstacles: Vec<Point2<f64>>,
    pub clearing_radius: Option<f64>,
    pub inflation: Option<InflationParams>,
    pub adaptive: bool,
}

impl LayerStack {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            spec,
            static_map: None,
            obstacles: Vec::new(),
            clearing_radius: None,
            inflation: None,
            adaptive: false,
        }
    }

    pub fn with_static(mut self, map: Costmap) -> Self {
        self.spec = *map.spec();
        self.static_map = Some(map);
        self
    }

    pub fn with_obstacles(mut self, points: Vec<Point2<f64>>) -> Self {
        self.obstacles = points;
        self
    }

    pub fn with_clean_people(mut self, radius: f64) -> Self {
        self.clearing_radius = Some(radius);
        self
    }

    pub fn with_inflation(mut self, params: InflationParams) -> Self {
        self.inflation = Some(params);
        self
    }

    pub fn with_adaptive(mut self) -> Self {
        self.adaptive = true;
        self
    }
}

pub fn compose(stack: &LayerStack, scene: &SceneState) -> Costmap {
    let mut master = match &stack.static_map {
        Some(m) => m.clone(),
        None => Costmap::new(stack.spec),
    };
    mark_obstacles(&mut master, &stack.obstacles);
    if let Some(r) = stack.clearing_radius {
        clean_people(&mut master, scene, r);
    }
    if let Some(params) = &stack.inflation {
        inflate(&mut master, params);
    }
    if stack.adaptive {
        apply_adaptive_layer(&mut master, scene);
    }
    master
}
