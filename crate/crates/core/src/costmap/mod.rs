//! Fixed-resolution cost grid and its layer stack.
//!
//! Cells hold costs on the usual 0..=254 scale: 254 is lethal, 253 marks
//! cells inside the robot's inscribed radius of an obstacle, and 255 is
//! kept as the "unknown" sentinel from the static map.

mod io;
mod layers;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

pub use self::io::{
    load_static_map, rasterize_static, read_binary, write_binary, write_csv, MapMetadata, StaticMap,
};
pub use self::layers::{
    adaptive_support_radius, apply_adaptive_layer, clean_people, compose,
    inflate, inflation_cost, mark_obstacles, round_half_up, InflationParams,
    LayerStack,
};

pub const FREE: u8 = 0;
pub const INSCRIBED: u8 = 253;
pub const LETHAL: u8 = 254;
pub const UNKNOWN: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    /// Meters per cell.
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            origin_x: 0.0,
            origin_y: 0.0,
            resolution: 0.05,
            width: 200,
            height: 200,
        }
    }
}

impl GridSpec {
    pub fn new(origin_x: f64, origin_y: f64, resolution: f64, width: usize, height: usize) -> Self {
        Self {
            origin_x,
            origin_y,
            resolution,
            width,
            height,
        }
    }

    /// Smallest grid covering `[min, max]` at `resolution`.
    pub fn covering(min: Point2<f64>, max: Point2<f64>, resolution: f64) -> Self {
        let width = (((max.x - min.x) / resolution).ceil() as usize).max(1);
        let height = (((max.y - min.y) / resolution).ceil() as usize).max(1);
        Self::new(min.x, min.y, resolution, width, height)
    }

    pub fn validate(&self, prefix: &str, errors: &mut Vec<String>) {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            errors.push(format!("{prefix}.resolution must be > 0 (got {})", self.resolution));
        }
        if self.width == 0 || self.height == 0 {
            errors.push(format!(
                "{prefix}.width and {prefix}.height must be > 0 (got {}x{})",
                self.width, self.height
            ));
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2<f64> {
        Point2::new(
            self.origin_x + (i as f64 + 0.5) * self.resolution,
            self.origin_y + (j as f64 + 0.5) * self.resolution,
        )
    }

    pub fn world_to_cell(&self, p: Point2<f64>) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin_x) / self.resolution).floor();
        let fy = ((p.y - self.origin_y) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    /// Inclusive cell range whose centres may lie within `radius` of `p`,
    /// clipped to the grid. `None` when the disc misses the grid.
    pub fn cell_window(&self, p: Point2<f64>, radius: f64) -> Option<((usize, usize), (usize, usize))> {
        let lo_x = ((p.x - radius - self.origin_x) / self.resolution - 0.5).floor().max(0.0);
        let lo_y = ((p.y - radius - self.origin_y) / self.resolution - 0.5).floor().max(0.0);
        let hi_x = ((p.x + radius - self.origin_x) / self.resolution - 0.5).ceil();
        let hi_y = ((p.y + radius - self.origin_y) / self.resolution - 0.5).ceil();
        if hi_x < 0.0 || hi_y < 0.0 || lo_x >= self.width as f64 || lo_y >= self.height as f64 {
            return None;
        }
        let hi_x = (hi_x as usize).min(self.width - 1);
        let hi_y = (hi_y as usize).min(self.height - 1);
        Some(((lo_x as usize, lo_y as usize), (hi_x, hi_y)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Costmap {
    spec: GridSpec,
    cells: Vec<u8>,
}

impl Costmap {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            cells: vec![FREE; spec.len()],
            spec,
        }
    }

    pub fn from_cells(spec: GridSpec, cells: Vec<u8>) -> Self {
        assert_eq!(cells.len(), spec.len(), "cell buffer does not match grid size");
        Self { spec, cells }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.cells[self.spec.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, cost: u8) {
        let k = self.spec.index(i, j);
        self.cells[k] = cost;
    }

    pub fn cost_at(&self, p: Point2<f64>) -> Option<u8> {
        self.spec.world_to_cell(p).map(|(i, j)| self.get(i, j))
    }

    pub fn count(&self, cost: u8) -> usize {
        self.cells.iter().filter(|&&c| c == cost).count()
    }
}
