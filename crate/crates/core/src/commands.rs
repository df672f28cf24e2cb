//! Command-line entry points. Each command writes into a single run
//! directory next to a `manifest.json` naming its inputs, the resolved
//! configuration and every file produced.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::Point2;
use rayon::prelude::*;
use serde::Serialize;

use crate::adaptation::Target;
use crate::config::RunConfig;
use crate::costmap::{apply_adaptive_layer, write_binary, Costmap, GridSpec};
use crate::error::{Error, Result};
use crate::eval::{
    compare_perimeters, read_dataset_rows, situations_from_rows, synthetic_dataset, write_dataset_rows,
};
use crate::geometry::Pose2D;
use crate::scene::SceneDoc;
use crate::sim::{approach_once, load_scenarios, run_scenario, write_summary_csv, Preset};
use crate::social_field::{global_field, SceneState};

#[derive(Debug, Parser)]
#[command(name = "socnav", version, about = "Adaptive social costmaps and approach planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the merged social field of a scene.
    Field(FieldArgs),
    /// Estimate an approach pose for one person or group.
    Approach(ApproachArgs),
    /// Run scenarios under one or more adaptation presets.
    Sim(SimArgs),
    /// Compare baseline and adapted approach perimeters over a dataset.
    Dataset(DatasetArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML or JSON run configuration; defaults apply to anything left out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run directory, created if missing.
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// `xmin,ymin,xmax,ymax` in meters. Defaults to the persons' extent plus 3 m.
    #[arg(long, value_parser = parse_bounds)]
    pub bounds: Option<[f64; 4]>,
    /// Meters per cell. Defaults to the configured grid resolution.
    #[arg(long)]
    pub resolution: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ApproachArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Person or group id.
    #[arg(long)]
    pub target: String,
    /// Robot pose as `x,y,theta`.
    #[arg(long, default_value = "0,0,0", value_parser = parse_pose)]
    pub robot: Pose2D,
    /// One of i, ii, iii, iv.
    #[arg(long, default_value = "iv", value_parser = parse_preset)]
    pub preset: Preset,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Scenario file(s); each holds one scenario or a list.
    #[arg(long, required = true, num_args = 1..)]
    pub scenario: Vec<PathBuf>,
    /// Presets to run, overriding each scenario's own list.
    #[arg(long, num_args = 1.., value_parser = parse_preset)]
    pub preset: Option<Vec<Preset>>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Situation CSV: situation_id,person_id,x,y,theta,group_id.
    #[arg(long, conflicts_with = "seed")]
    pub dataset: Option<PathBuf>,
    /// Generate a synthetic dataset from this seed instead.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of synthetic groups.
    #[arg(long, default_value_t = 300)]
    pub groups: usize,
    #[command(flatten)]
    pub common: Common,
}

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    NoResult,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Done => 0,
            Outcome::NoResult => 2,
        }
    }
}

fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers"));
    }
    let mut out = [0.0f64; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

fn parse_bounds(s: &str) -> std::result::Result<[f64; 4], String> {
    let b = parse_floats::<4>(s)?;
    if b[2] <= b[0] || b[3] <= b[1] {
        return Err("bounds must satisfy xmin < xmax and ymin < ymax".into());
    }
    Ok(b)
}

fn parse_pose(s: &str) -> std::result::Result<Pose2D, String> {
    parse_floats::<3>(s).map(|[x, y, t]| Pose2D::new(x, y, t))
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    Preset::parse(s).ok_or_else(|| format!("unknown preset `{s}` (expected i, ii, iii or iv)"))
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    inputs: BTreeMap<&'a str, String>,
    workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    config: &'a RunConfig,
    outputs: Vec<String>,
}

struct RunDir {
    root: PathBuf,
    outputs: Vec<String>,
}

impl RunDir {
    fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let path = self.root.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")
        })
    }

    fn finish(mut self, manifest: Manifest<'_>) -> Result<()> {
        let manifest = Manifest {
            outputs: std::mem::take(&mut self.outputs),
            ..manifest
        };
        self.write_json("manifest.json", &manifest)
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(vec![format!("workers: {e}")]))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Field(a) => cmd_field(&a),
        Command::Approach(a) => cmd_approach(&a),
        Command::Sim(a) => cmd_sim(&a),
        Command::Dataset(a) => cmd_dataset(&a),
    }
}

fn load_scene(path: &Path, cfg: &RunConfig) -> Result<SceneState> {
    SceneDoc::load(path)?
        .to_scene(&cfg.person, &cfg.group)
        .map_err(|e| Error::parse(path, e))
}

/// Field dump: `field.csv` holds the raw values one grid row per line from
/// the lowest row up; `field.bin` holds the rounded adaptive layer.
pub fn cmd_field(a: &FieldArgs) -> Result<Outcome> {
    let cfg = load_config(a.common.config.as_deref())?;
    let scene = load_scene(&a.scene, &cfg)?;
    let res = a.resolution.unwrap_or(cfg.grid.resolution);
    if !(res > 0.0 && res.is_finite()) {
        return Err(Error::InvalidConfig(vec![format!("resolution must be > 0 (got {res})")]));
    }
    let spec = match a.bounds {
        Some([x0, y0, x1, y1]) => GridSpec::covering(Point2::new(x0, y0), Point2::new(x1, y1), res),
        None if scene.persons.is_empty() => GridSpec { resolution: res, ..cfg.grid },
        None => {
            let xs = scene.persons.iter().map(|p| p.pose.x);
            let ys = scene.persons.iter().map(|p| p.pose.y);
            let lo = Point2::new(xs.clone().fold(f64::INFINITY, f64::min), ys.clone().fold(f64::INFINITY, f64::min));
            let hi = Point2::new(xs.fold(f64::NEG_INFINITY, f64::max), ys.fold(f64::NEG_INFINITY, f64::max));
            GridSpec::covering(lo - nalgebra::Vector2::repeat(3.0), hi + nalgebra::Vector2::repeat(3.0), res)
        }
    };
    let pool = pool(a.common.workers)?;
    let values: Vec<f64> = pool.install(|| {
        (0..spec.len())
            .into_par_iter()
            .map(|k| global_field(&scene, spec.cell_center(k % spec.width, k / spec.width)))
            .collect()
    });
    let mut layer = Costmap::new(spec);
    pool.install(|| apply_adaptive_layer(&mut layer, &scene));

    let mut dir = RunDir::create(&a.common.out)?;
    dir.write("field.csv", |w| {
        for row in values.chunks(spec.width) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    })?;
    dir.write("field.bin", |w| write_binary(&layer, w))?;
    dir.write_json("grid.json", &spec)?;
    dir.finish(Manifest {
        command: "field",
        version: env!("CARGO_PKG_VERSION"),
        inputs: BTreeMap::from([("scene", display(&a.scene))]),
        workers: a.common.workers,
        seed: None,
        config: &cfg,
        outputs: vec![],
    })?;
    Ok(Outcome::Done)
}

/// Writes the full search record to `approach.json` and prints the chosen
/// pose. No pose at any radius gives [`Outcome::NoResult`].
pub fn cmd_approach(a: &ApproachArgs) -> Result<Outcome> {
    let cfg = load_config(a.common.config.as_deref())?;
    let scene = load_scene(&a.scene, &cfg)?;
    let target = Target::resolve(&scene, &a.target).ok_or_else(|| Error::UnknownEntity(a.target.clone()))?;
    let center = target.center(&scene).expect("resolved target has a centre");
    // grid of the configured size, centred on the target
    let g = cfg.grid;
    let spec = GridSpec::new(
        center.x - g.width as f64 * g.resolution / 2.0,
        center.y - g.height as f64 * g.resolution / 2.0,
        g.resolution,
        g.width,
        g.height,
    );
    let pool = pool(a.common.workers)?;
    let report = pool.install(|| approach_once(&scene, &target, a.robot, a.preset, spec, &cfg))?;

    let mut dir = RunDir::create(&a.common.out)?;
    dir.write_json("approach.json", &report)?;
    dir.finish(Manifest {
        command: "approach",
        version: env!("CARGO_PKG_VERSION"),
        inputs: BTreeMap::from([
            ("scene", display(&a.scene)),
            ("target", a.target.clone()),
            ("robot", format!("{},{},{}", a.robot.x, a.robot.y, a.robot.theta)),
            ("preset", a.preset.label().to_string()),
        ]),
        workers: a.common.workers,
        seed: None,
        config: &cfg,
        outputs: vec![],
    })?;
    match report.pose {
        Some(pose) => {
            println!("{}", serde_json::to_string(&pose).expect("pose serializes"));
            Ok(Outcome::Done)
        }
        None => {
            eprintln!("no valid approach pose for `{}`", a.target);
            Ok(Outcome::NoResult)
        }
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Per run: `<scenario>_<preset>.ndjson` and `<scenario>_<preset>_hsci.csv`;
/// one `summary.csv` and `summary.json` row per run.
pub fn cmd_sim(a: &SimArgs) -> Result<Outcome> {
    let cfg = load_config(a.common.config.as_deref())?;
    let mut scenarios = Vec::new();
    for path in &a.scenario {
        scenarios.extend(load_scenarios(path)?);
    }
    let mut jobs = Vec::new();
    for (k, (scenario, map)) in scenarios.iter().enumerate() {
        let presets = a.preset.clone().unwrap_or_else(|| scenario.configs.clone());
        for preset in presets {
            jobs.push((k, scenario, map.as_ref(), preset));
        }
    }
    let pool = pool(a.common.workers)?;
    let traces = pool.install(|| {
        jobs.par_iter()
            .map(|&(_, scenario, map, preset)| run_scenario(scenario, map, preset, &cfg))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut dir = RunDir::create(&a.common.out)?;
    for ((k, scenario, _, preset), trace) in jobs.iter().zip(&traces) {
        let stem = format!("{:02}_{}_{}", k, file_stem(&scenario.name), preset.label());
        dir.write(&format!("{stem}.ndjson"), |w| trace.write_ndjson(w))?;
        dir.write(&format!("{stem}_hsci.csv"), |w| trace.write_hsci_csv(w))?;
    }
    let summaries: Vec<_> = traces.iter().map(|t| t.summary.clone()).collect();
    let mut buf = Vec::new();
    write_summary_csv(&summaries, &mut buf)?;
    dir.write("summary.csv", |w| w.write_all(&buf))?;
    dir.write_json("summary.json", &summaries)?;
    let scenario_list: Vec<String> = a.scenario.iter().map(|p| display(p)).collect();
    let inputs = BTreeMap::from([("scenario", scenario_list.join(";"))]);
    dir.finish(Manifest {
        command: "sim",
        version: env!("CARGO_PKG_VERSION"),
        inputs,
        workers: a.common.workers,
        seed: None,
        config: &cfg,
        outputs: vec![],
    })?;
    Ok(Outcome::Done)
}

/// `report.csv` holds one row per group and sweep point, `summary.json` the
/// aggregates. A synthetic dataset is saved as `dataset.csv`.
pub fn cmd_dataset(a: &DatasetArgs) -> Result<Outcome> {
    let cfg = load_config(a.common.config.as_deref())?;
    let (rows, source) = match (&a.dataset, a.seed) {
        (Some(p), _) => (read_dataset_rows(p)?, display(p)),
        (None, Some(seed)) => (synthetic_dataset(a.groups, seed), format!("synthetic:{}", a.groups)),
        (None, None) => {
            return Err(Error::InvalidConfig(vec!["either --dataset or --seed is required".into()]))
        }
    };
    let situations = situations_from_rows(&rows, &cfg.person, &cfg.group)?;
    let pool = pool(a.common.workers)?;
    let report = pool.install(|| {
        compare_perimeters(&situations, &cfg.adaptation, &cfg.approach, &cfg.sweep, cfg.grid.resolution)
    })?;

    let mut dir = RunDir::create(&a.common.out)?;
    if a.dataset.is_none() {
        let path = dir.root.join("dataset.csv");
        write_dataset_rows(&rows, &path)?;
        dir.outputs.push("dataset.csv".into());
    }
    let path = dir.root.join("report.csv");
    report.write_csv(&path)?;
    dir.outputs.push("report.csv".into());
    dir.write_json("summary.json", &report.aggregates)?;
    dir.finish(Manifest {
        command: "dataset",
        version: env!("CARGO_PKG_VERSION"),
        inputs: BTreeMap::from([("dataset", source)]),
        workers: a.common.workers,
        seed: a.seed,
        config: &cfg,
        outputs: vec![],
    })?;
    Ok(Outcome::Done)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_parsers() {
        assert_eq!(parse_pose("1, -2.5,0.3").unwrap(), Pose2D::new(1.0, -2.5, 0.3));
        assert!(parse_pose("1,2").is_err());
        assert!(parse_bounds("0,0,1,1").is_ok());
        assert!(parse_bounds("1,0,0,1").is_err());
        assert!(parse_preset("III").is_ok());
        assert!(parse_preset("v").is_err());
    }

    #[test]
    fn stems_are_path_safe() {
        assert_eq!(file_stem("dyn pair/1.5"), "dyn_pair_1_5");
    }
}
