//! Comfort indexes over simulation traces and the approach-perimeter study.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Point2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptation::{adapt_group, AdaptationConfig};
use crate::approach::{approach_perimeter, ApproachConfig};
use crate::costmap::{apply_adaptive_layer, Costmap, GridSpec};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Pose2D};
use crate::sim::TraceRecord;
use crate::social_field::{GaussianParams, GroupSpaceModel, GroupState, PersonState, SceneState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub comfort_threshold: f64,
    pub sii_sigma: f64,
    /// Breaches shorter than this are marked transient.
    pub transient_grace: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            comfort_threshold: 0.14,
            sii_sigma: 0.45,
            transient_grace: 0.0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self, prefix: &str, errors: &mut Vec<String>) {
        if !(self.comfort_threshold > 0.0 && self.comfort_threshold < 1.0) {
            errors.push(format!(
                "{prefix}.comfort_threshold must lie in (0, 1) (got {})",
                self.comfort_threshold
            ));
        }
        if !(self.sii_sigma > 0.0) {
            errors.push(format!("{prefix}.sii_sigma must be > 0 (got {})", self.sii_sigma));
        }
        if !(self.transient_grace >= 0.0) {
            errors.push(format!("{prefix}.transient_grace must be >= 0 (got {})", self.transient_grace));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsciSample {
    pub t: f64,
    pub sii: f64,
    pub sgi: f64,
    pub sdi: f64,
}

fn gaussian_index(d: f64, scale: f64) -> f64 {
    if scale <= 0.0 {
        return if d == 0.0 { 1.0 } else { 0.0 };
    }
    (-(d * d) / (2.0 * scale * scale)).exp()
}

pub fn compute_sii(robot: &Pose2D, scene: &SceneState, cfg: &EvalConfig) -> f64 {
    scene
        .persons
        .iter()
        .map(|p| gaussian_index(p.pose.to_local(&robot.position()).norm(), cfg.sii_sigma))
        .fold(0.0, f64::max)
}

pub fn compute_sgi(robot: &Pose2D, scene: &SceneState) -> f64 {
    scene
        .groups
        .iter()
        .map(|g| gaussian_index((robot.position() - g.center).norm(), g.radius))
        .fold(0.0, f64::max)
}

/// 1 when the robot faces the target head-on, 0 when it looks the same way.
pub fn compute_sdi(robot: &Pose2D, target_heading: f64) -> f64 {
    (1.0 + (robot.theta - (target_heading + PI)).cos()) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Sii,
    Sgi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreachInterval {
    pub index: IndexKind,
    pub start: f64,
    pub end: f64,
    pub duration: f64,
    pub peak: f64,
    /// The robot stayed behind the nearest person for the whole breach.
    pub behind: bool,
    pub transient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub max_sii: f64,
    pub max_sgi: f64,
    pub final_sii: f64,
    pub final_sgi: f64,
    pub final_sdi: f64,
    pub breaches: Vec<BreachInterval>,
}

fn behind_nearest(rec: &TraceRecord) -> bool {
    let r = rec.robot.position();
    rec.persons
        .iter()
        .min_by(|a, b| {
            let da = (Point2::new(a.x, a.y) - r).norm();
            let db = (Point2::new(b.x, b.y) - r).norm();
            da.total_cmp(&db)
        })
        .map(|p| {
            let heading = Vector2::new(p.theta.cos(), p.theta.sin());
            (r - Point2::new(p.x, p.y)).dot(&heading) < 0.0
        })
        .unwrap_or(false)
}

pub fn breach_intervals(records: &[TraceRecord], dt: f64, kind: IndexKind, cfg: &EvalConfig) -> Vec<BreachInterval> {
    let value = |r: &TraceRecord| match kind {
        IndexKind::Sii => r.hsci.sii,
        IndexKind::Sgi => r.hsci.sgi,
    };
    let mut out = Vec::new();
    let mut k = 0;
    while k < records.len() {
        if value(&records[k]) <= cfg.comfort_threshold {
            k += 1;
            continue;
        }
        let start = k;
        while k < records.len() && value(&records[k]) > cfg.comfort_threshold {
            k += 1;
        }
        let run = &records[start..k];
        let duration = run.len() as f64 * dt;
        out.push(BreachInterval {
            index: kind,
            start: run[0].t,
            end: run[0].t + duration,
            duration,
            peak: run.iter().map(value).fold(0.0, f64::max),
            behind: run.iter().all(behind_nearest),
            transient: duration < cfg.transient_grace,
        });
    }
    out
}

pub fn evaluate_trace(records: &[TraceRecord], dt: f64, cfg: &EvalConfig) -> TraceSummary {
    let last = records.last();
    let mut breaches = breach_intervals(records, dt, IndexKind::Sii, cfg);
    breaches.extend(breach_intervals(records, dt, IndexKind::Sgi, cfg));
    TraceSummary {
        max_sii: records.iter().map(|r| r.hsci.sii).fold(0.0, f64::max),
        max_sgi: records.iter().map(|r| r.hsci.sgi).fold(0.0, f64::max),
        final_sii: last.map_or(0.0, |r| r.hsci.sii),
        final_sgi: last.map_or(0.0, |r| r.hsci.sgi),
        final_sdi: last.map_or(0.0, |r| r.hsci.sdi),
        breaches,
    }
}

/// One row of the situation dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub situation_id: String,
    pub person_id: String,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    #[serde(default)]
    pub group_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Situation {
    pub id: String,
    pub scene: SceneState,
}

/// Builds situations from rows, keeping first-appearance order.
pub fn situations_from_rows(
    rows: &[DatasetRow],
    person: &GaussianParams,
    model: &GroupSpaceModel,
) -> Result<Vec<Situation>> {
    let mut order: Vec<String> = Vec::new();
    let mut by_id: BTreeMap<String, Vec<&DatasetRow>> = BTreeMap::new();
    for r in rows {
        if !by_id.contains_key(&r.situation_id) {
            order.push(r.situation_id.clone());
        }
        by_id.entry(r.situation_id.clone()).or_default().push(r);
    }
    let mut out = Vec::with_capacity(order.len());
    for sid in order {
        let rows = &by_id[&sid];
        let persons: Vec<PersonState> = rows
            .iter()
            .map(|r| PersonState::new(r.person_id.clone(), Pose2D::new(r.x, r.y, r.theta), *person))
            .collect();
        let mut group_ids: Vec<&str> = Vec::new();
        for r in rows.iter() {
            if let Some(g) = r.group_id.as_deref().filter(|g| !g.is_empty()) {
                if !group_ids.contains(&g) {
                    group_ids.push(g);
                }
            }
        }
        let mut groups = Vec::new();
        for gid in group_ids {
            let members: Vec<&PersonState> = rows
                .iter()
                .zip(&persons)
                .filter(|(r, _)| r.group_id.as_deref() == Some(gid))
                .map(|(_, p)| p)
                .collect();
            groups.push(GroupState::from_members(gid, &members, model)?);
        }
        let scene = SceneState::new(persons, groups)
            .map_err(|e| Error::Dataset(format!("situation `{sid}`: {e}")))?;
        out.push(Situation { id: sid, scene });
    }
    Ok(out)
}

pub fn read_dataset_rows(path: &Path) -> Result<Vec<DatasetRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    reader
        .deserialize()
        .enumerate()
        .map(|(k, r)| r.map_err(|e| Error::Dataset(format!("{} row {}: {e}", path.display(), k + 1))))
        .collect()
}

pub fn write_dataset_rows(rows: &[DatasetRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::parse(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Groups arranged on circles, members facing the centre with some jitter.
pub fn synthetic_dataset(n_groups: usize, seed: u64) -> Vec<DatasetRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for g in 0..n_groups {
        let size = rng.gen_range(2..=5usize);
        let radius = rng.gen_range(0.5..1.3);
        let phase = rng.gen_range(0.0..2.0 * PI);
        for m in 0..size {
            let ang = phase + 2.0 * PI * m as f64 / size as f64 + rng.gen_range(-0.15..0.15);
            let r = radius * rng.gen_range(0.9..1.1);
            let theta = wrap_angle(ang + PI + rng.gen_range(-0.2..0.2));
            rows.push(DatasetRow {
                situation_id: format!("s{g:03}"),
                person_id: format!("s{g:03}p{m}"),
                x: r * ang.cos(),
                y: r * ang.sin(),
                theta,
                group_id: Some(format!("s{g:03}g")),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub s_r: Vec<f64>,
    pub s_h: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            s_r: vec![0.45, 0.8],
            s_h: vec![0.225, 0.3, 0.375, 0.45],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerimeterRow {
    pub situation_id: String,
    pub group_id: String,
    pub size: usize,
    pub s_r: f64,
    pub s_h: f64,
    pub baseline: f64,
    pub adapted: f64,
    /// Some member's parameters changed.
    pub params_changed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeAggregate {
    pub size: usize,
    pub groups: usize,
    pub baseline: f64,
    pub adapted: f64,
    /// Increase of the summed perimeter, in percent.
    pub percent: f64,
    /// Mean of per-group increases over groups with a non-zero baseline.
    pub mean_group_percent: f64,
    /// Groups with no baseline perimeter that gained one.
    pub opened: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub s_r: f64,
    pub s_h: f64,
    pub baseline: f64,
    pub adapted: f64,
    pub percent: f64,
    pub situations_adapted: usize,
    pub by_size: Vec<SizeAggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerimeterReport {
    pub rows: Vec<PerimeterRow>,
    pub aggregates: Vec<SweepAggregate>,
}

impl PerimeterReport {
    pub fn aggregate(&self, s_r: f64, s_h: f64) -> Option<&SweepAggregate> {
        self.aggregates.iter().find(|a| a.s_r == s_r && a.s_h == s_h)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::parse(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn percent(base: f64, adapted: f64) -> f64 {
    if base > 0.0 {
        100.0 * (adapted - base) / base
    } else {
        0.0
    }
}

/// Field-only grid around one group, wide enough for its approach circle.
fn group_grid(scene: &SceneState, group: &GroupState, resolution: f64) -> Costmap {
    let margin = group.radius + 1.0;
    let min = Point2::new(group.center.x - margin, group.center.y - margin);
    let max = Point2::new(group.center.x + margin, group.center.y + margin);
    let mut map = Costmap::new(GridSpec::covering(min, max, resolution));
    apply_adaptive_layer(&mut map, scene);
    map
}

pub fn compare_perimeters(
    situations: &[Situation],
    adapt: &AdaptationConfig,
    approach: &ApproachConfig,
    sweep: &SweepSpec,
    resolution: f64,
) -> Result<PerimeterReport> {
    let mut jobs = Vec::new();
    for s_r in &sweep.s_r {
        for s_h in &sweep.s_h {
            for sit in situations {
                for g in &sit.scene.groups {
                    if g.members.len() >= 2 {
                        jobs.push((*s_r, *s_h, sit, g));
                    }
                }
            }
        }
    }
    let rows: Vec<PerimeterRow> = jobs
        .par_iter()
        .map(|&(s_r, s_h, sit, g)| -> Result<PerimeterRow> {
            let cfg = AdaptationConfig { s_r, s_h, ..*adapt };
            let adapted_scene = adapt_group(&sit.scene, &g.id, &cfg)?;
            let base_map = group_grid(&sit.scene, g, resolution);
            let adapted_map = group_grid(&adapted_scene, g, resolution);
            let changed = g
                .members
                .iter()
                .any(|m| sit.scene.person(m).map(|p| p.params) != adapted_scene.person(m).map(|p| p.params));
            Ok(PerimeterRow {
                situation_id: sit.id.clone(),
                group_id: g.id.clone(),
                size: g.members.len(),
                s_r,
                s_h,
                baseline: approach_perimeter(&base_map, g.center, g.radius, approach, s_r),
                adapted: approach_perimeter(&adapted_map, g.center, g.radius, approach, s_r),
                params_changed: changed,
            })
        })
        .collect::<Result<_>>()?;

    let mut aggregates = Vec::new();
    for s_r in &sweep.s_r {
        for s_h in &sweep.s_h {
            let sel: Vec<&PerimeterRow> = rows.iter().filter(|r| r.s_r == *s_r && r.s_h == *s_h).collect();
            let baseline: f64 = sel.iter().map(|r| r.baseline).sum();
            let adapted: f64 = sel.iter().map(|r| r.adapted).sum();
            let mut sizes: BTreeMap<usize, Vec<&PerimeterRow>> = BTreeMap::new();
            for r in &sel {
                sizes.entry(r.size).or_default().push(r);
            }
            let by_size = sizes
                .into_iter()
                .map(|(size, rs)| {
                    let b: f64 = rs.iter().map(|r| r.baseline).sum();
                    let a: f64 = rs.iter().map(|r| r.adapted).sum();
                    let with_base: Vec<f64> = rs
                        .iter()
                        .filter(|r| r.baseline > 0.0)
                        .map(|r| percent(r.baseline, r.adapted))
                        .collect();
                    SizeAggregate {
                        size,
                        groups: rs.len(),
                        baseline: b,
                        adapted: a,
                        percent: percent(b, a),
                        mean_group_percent: if with_base.is_empty() {
                            0.0
                        } else {
                            with_base.iter().sum::<f64>() / with_base.len() as f64
                        },
                        opened: rs.iter().filter(|r| r.baseline == 0.0 && r.adapted > 0.0).count(),
                    }
                })
                .collect();
            let mut adapted_situations: Vec<&str> = sel
                .iter()
                .filter(|r| r.params_changed)
                .map(|r| r.situation_id.as_str())
                .collect();
            adapted_situations.dedup();
            aggregates.push(SweepAggregate {
                s_r: *s_r,
                s_h: *s_h,
                baseline,
                adapted,
                percent: percent(baseline, adapted),
                situations_adapted: adapted_situations.len(),
                by_size,
            });
        }
    }
    Ok(PerimeterReport { rows, aggregates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sii_threshold_distance() {
        let cfg = EvalConfig::default();
        let person = PersonState::new("p", Pose2D::new(0.0, 0.0, 0.3), GaussianParams::isotropic(211.0, 0.4));
        let scene = SceneState::new(vec![person], vec![]).unwrap();
        let d = 0.45 * (2.0 * (1.0f64 / 0.14).ln()).sqrt();
        assert!((d - 0.892).abs() < 1e-3);
        let at = |x: f64| compute_sii(&Pose2D::new(x, 0.0, 0.0), &scene, &cfg);
        assert_eq!(at(0.0), 1.0);
        assert!((at(d) - 0.14).abs() < 1e-12);
        assert!(at(1e3) == 0.0);
        assert_eq!(compute_sii(&Pose2D::default(), &SceneState::default(), &cfg), 0.0);
    }

    #[test]
    fn sgi_and_sdi() {
        let a = PersonState::new("a", Pose2D::new(1.0, 0.0, PI), GaussianParams::isotropic(211.0, 0.4));
        let b = PersonState::new("b", Pose2D::new(-1.0, 0.0, 0.0), GaussianParams::isotropic(211.0, 0.4));
        let g = GroupState::from_members("g", &[&a, &b], &GroupSpaceModel::default()).unwrap();
        let scene = SceneState::new(vec![a, b], vec![g]).unwrap();
        assert_eq!(compute_sgi(&Pose2D::default(), &scene), 1.0);
        let d = (2.0 * (1.0f64 / 0.14).ln()).sqrt();
        assert!((d - 1.982).abs() < 1e-3);
        assert!((compute_sgi(&Pose2D::new(0.0, d, 0.0), &scene) - 0.14).abs() < 1e-12);
        assert_eq!(compute_sgi(&Pose2D::default(), &SceneState::default()), 0.0);

        assert!((compute_sdi(&Pose2D::new(0.0, 0.0, PI), 0.0) - 1.0).abs() < 1e-12);
        assert!((compute_sdi(&Pose2D::new(0.0, 0.0, PI / 2.0), 0.0) - 0.5).abs() < 1e-12);
        assert!(compute_sdi(&Pose2D::new(0.0, 0.0, 0.0), 0.0).abs() < 1e-12);
    }

    #[test]
    fn dataset_rows_build_situations() {
        let rows = synthetic_dataset(5, 3);
        let sits = situations_from_rows(&rows, &GaussianParams::isotropic(211.0, 0.4), &GroupSpaceModel::default()).unwrap();
        assert_eq!(sits.len(), 5);
        assert!(sits.iter().all(|s| s.scene.groups.len() == 1));
        assert_eq!(synthetic_dataset(5, 3), rows);
    }

    #[test]
    fn empty_dataset_report() {
        let r = compare_perimeters(&[], &AdaptationConfig::default(), &ApproachConfig::default(), &SweepSpec::default(), 0.05)
            .unwrap();
        assert!(r.rows.is_empty());
        assert!(r.aggregates.iter().all(|a| a.percent == 0.0 && a.by_size.is_empty()));
    }
}
