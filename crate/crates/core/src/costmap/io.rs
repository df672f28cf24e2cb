use std::fs;
use std::io::Write;
use std::path::Path;

use image::DynamicImage;
use serde::{Deserialize, Serialize};

use super::{Costmap, GridSpec, FREE, LETHAL, UNKNOWN};
use crate::error::{Error, Result};

/// ROS-style map metadata (the YAML companion of a graymap image).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub image: String,
    pub resolution: f64,
    #[serde(default)]
    pub origin: [f64; 3],
    #[serde(default)]
    pub negate: i32,
    #[serde(default = "default_occupied")]
    pub occupied_thresh: f64,
    #[serde(default = "default_free")]
    pub free_thresh: f64,
}

fn default_occupied() -> f64 {
    0.65
}

fn default_free() -> f64 {
    0.196
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticMap {
    pub metadata: MapMetadata,
    pub costmap: Costmap,
}

impl StaticMap {
    /// Builds the grid from row-major gray pixels, first row = top of image.
    pub fn from_pixels(metadata: MapMetadata, width: usize, height: usize, pixels: &[u8]) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Map(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if !(metadata.resolution > 0.0) {
            return Err(Error::Map(format!("resolution must be > 0 (got {})", metadata.resolution)));
        }
        let spec = GridSpec::new(metadata.origin[0], metadata.origin[1], metadata.resolution, width, height);
        let mut costmap = Costmap::new(spec);
        for row in 0..height {
            // image rows go top-down, grid rows bottom-up
            let j = height - 1 - row;
            for i in 0..width {
                let v = pixels[row * width + i] as f64;
                let p = if metadata.negate != 0 { v / 255.0 } else { (255.0 - v) / 255.0 };
                let cost = if p > metadata.occupied_thresh {
                    LETHAL
                } else if p < metadata.free_thresh {
                    FREE
                } else {
                    UNKNOWN
                };
                costmap.set(i, j, cost);
            }
        }
        Ok(Self { metadata, costmap })
    }
}

/// Loads a YAML metadata file and the graymap it points to.
pub fn load_static_map(yaml_path: &Path) -> Result<StaticMap> {
    let text = fs::read_to_string(yaml_path).map_err(|e| Error::io(yaml_path, e))?;
    let metadata: MapMetadata = serde_yaml::from_str(&text).map_err(|e| Error::parse(yaml_path, e))?;
    let image_path = yaml_path.parent().unwrap_or(Path::new(".")).join(&metadata.image);
    let bytes = fs::read(&image_path).map_err(|e| Error::io(&image_path, e))?;
    let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Pnm)
        .map_err(|e| Error::Map(format!("{}: {e}", image_path.display())))?;
    let gray = match img {
        DynamicImage::ImageLuma8(g) => g,
        other => other.to_luma8(),
    };
    let (w, h) = gray.dimensions();
    StaticMap::from_pixels(metadata, w as usize, h as usize, gray.as_raw())
}

pub fn rasterize_static(yaml_path: &Path) -> Result<Costmap> {
    load_static_map(yaml_path).map(|m| m.costmap)
}

/// Integer CSV, one grid row per line starting from row 0.
pub fn write_csv(costmap: &Costmap, out: &mut impl Write) -> std::io::Result<()> {
    let w = costmap.spec().width;
    for row in costmap.cells().chunks(w) {
        let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_binary(costmap: &Costmap, out: &mut impl Write) -> std::io::Result<()> {
    let spec = costmap.spec();
    out.write_all(&(spec.width as u32).to_le_bytes())?;
    out.write_all(&(spec.height as u32).to_le_bytes())?;
    out.write_all(&(spec.resolution as f32).to_le_bytes())?;
    out.write_all(&0u32.to_le_bytes())?;
    out.write_all(costmap.cells())
}

/// Reads the binary dump back. The origin is not stored and comes back as zero.
pub fn read_binary(bytes: &[u8]) -> Result<Costmap> {
    if bytes.len() < 16 {
        return Err(Error::Map("binary dump shorter than its header".into()));
    }
    let word = |k: usize| [bytes[k], bytes[k + 1], bytes[k + 2], bytes[k + 3]];
    let width = u32::from_le_bytes(word(0)) as usize;
    let height = u32::from_le_bytes(word(4)) as usize;
    let resolution = f32::from_le_bytes(word(8)) as f64;
    let body = &bytes[16..];
    if body.len() != width * height {
        return Err(Error::Map(format!(
            "binary dump holds {} cells, header says {}x{}",
            body.len(),
            width,
            height
        )));
    }
    Ok(Costmap::from_cells(
        GridSpec::new(0.0, 0.0, resolution, width, height),
        body.to_vec(),
    ))
}
