//! Approach pose search on circles around a target person or group.

use std::f64::consts::PI;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::adaptation::Target;
use crate::costmap::{Costmap, LETHAL, UNKNOWN};
use crate::geometry::{wrap_angle, Pose2D};
use crate::social_field::{GaussianParams, SceneState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApproachConfig {
    /// Samples with cost strictly below this are approachable.
    pub free_threshold: u8,
    /// Lower bound on the first circle around a lone person.
    pub initial_radius_person: f64,
    pub step: f64,
    pub d_a_limit: f64,
    pub a_a_adapt: f64,
    pub a_a_limit: f64,
    pub v_mod: f64,
    /// Full opening angle, radians.
    pub f_ifov: f64,
    pub f_mod: f64,
    /// How far past the initial radius the search may grow.
    pub max_radius: f64,
    pub track_threshold: f64,
}

impl Default for ApproachConfig {
    fn default() -> Self {
        Self {
            free_threshold: 100,
            initial_radius_person: 0.45,
            step: 0.1,
            d_a_limit: 6.0,
            a_a_adapt: 1.5,
            a_a_limit: 1.2,
            v_mod: 10.0,
            f_ifov: PI / 2.0,
            f_mod: 1.1,
            max_radius: 0.5,
            track_threshold: 1.0,
        }
    }
}

impl ApproachConfig {
    pub fn validate(&self, prefix: &str, errors: &mut Vec<String>) {
        let mut positive = |name: &str, v: f64| {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("{prefix}.{name} must be > 0 (got {v})"));
            }
        };
        positive("step", self.step);
        positive("f_mod", self.f_mod);
        positive("f_ifov", self.f_ifov);
        positive("track_threshold", self.track_threshold);
        positive("d_a_limit", self.d_a_limit);
        if self.free_threshold == 0 {
            errors.push(format!("{prefix}.free_threshold must be > 0"));
        }
        for (name, v) in [
            ("initial_radius_person", self.initial_radius_person),
            ("a_a_adapt", self.a_a_adapt),
            ("a_a_limit", self.a_a_limit),
            ("v_mod", self.v_mod),
            ("max_radius", self.max_radius),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                errors.push(format!("{prefix}.{name} must be >= 0 (got {v})"));
            }
        }
        if self.f_ifov > 2.0 * PI {
            errors.push(format!("{prefix}.f_ifov must be <= 2*pi (got {})", self.f_ifov));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleSample {
    pub index: usize,
    pub angle: f64,
    pub x: f64,
    pub y: f64,
    /// 255 when the sample falls off the grid.
    pub cost: u8,
    pub free: bool,
}

impl CircleSample {
    pub fn point(&self) -> Point2<f64> {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachZone {
    pub samples: Vec<CircleSample>,
    pub width: f64,
}

impl ApproachZone {
    fn new(samples: Vec<CircleSample>) -> Self {
        let mut width: f64 = 0.0;
        for (k, a) in samples.iter().enumerate() {
            for b in &samples[k + 1..] {
                width = width.max((a.point() - b.point()).norm());
            }
        }
        Self { samples, width }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproachPose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub radius_used: f64,
    pub zone_id: usize,
    /// The field-of-view filter found nothing and was skipped.
    pub fov_fallback: bool,
}

impl ApproachPose {
    pub fn pose(&self) -> Pose2D {
        Pose2D::new(self.x, self.y, self.heading)
    }

    pub fn position(&self) -> Point2<f64> {
        Point2::new(self.x, self.y)
    }
}

pub fn sample_count(radius: f64, resolution: f64) -> usize {
    ((2.0 * PI * radius / resolution).ceil() as usize).max(64)
}

pub fn sample_circumference(
    costmap: &Costmap,
    center: Point2<f64>,
    radius: f64,
    n_samples: usize,
    free_threshold: u8,
) -> Vec<CircleSample> {
    (0..n_samples)
        .map(|index| {
            let angle = 2.0 * PI * index as f64 / n_samples as f64;
            let p = center + radius * nalgebra::Vector2::new(angle.cos(), angle.sin());
            let cost = costmap.cost_at(p).unwrap_or(UNKNOWN);
            CircleSample {
                index,
                angle,
                x: p.x,
                y: p.y,
                cost,
                free: cost < free_threshold && cost < LETHAL,
            }
        })
        .collect()
}

/// Groups a run of samples into maximal contiguous runs satisfying `keep`.
/// With `circular`, a run may wrap from the last sample to the first.
fn runs<F>(samples: &[CircleSample], circular: bool, keep: F) -> Vec<Vec<CircleSample>>
where
    F: Fn(&CircleSample) -> bool,
{
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    if samples.iter().all(&keep) {
        return vec![samples.to_vec()];
    }
    let start = if circular {
        // begin right after a rejected sample so no run is split by the seam
        (samples.iter().position(|s| !keep(s)).unwrap() + 1) % n
    } else {
        0
    };
    let mut out = Vec::new();
    let mut current = Vec::new();
    for k in 0..n {
        let s = &samples[(start + k) % n];
        if keep(s) {
            current.push(*s);
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

pub fn extract_zones(samples: &[CircleSample]) -> Vec<ApproachZone> {
    runs(samples, true, |s| s.free)
        .into_iter()
        .map(ApproachZone::new)
        .collect()
}

/// Persons whose field of view matters for the target.
pub fn viewers(scene: &SceneState, target: &Target) -> Vec<Pose2D> {
    match target {
        Target::Person(id) => scene.person(id).map(|p| vec![p.pose]).unwrap_or_default(),
        Target::Group(id) => scene
            .group(id)
            .map(|g| {
                g.members
                    .iter()
                    .filter_map(|m| scene.person(m))
                    .map(|p| p.pose)
                    .collect()
            })
            .unwrap_or_default(),
    }
}

fn in_cone(viewer: &Pose2D, p: Point2<f64>, half_angle: f64) -> bool {
    let v = p - viewer.position();
    if v.norm() == 0.0 {
        return true;
    }
    wrap_angle(v.y.atan2(v.x) - viewer.theta).abs() <= half_angle
}

/// Keeps the parts of each zone seen by every viewer. Returns the input
/// untouched and `true` when nothing survives.
pub fn filter_fov(zones: &[ApproachZone], viewers: &[Pose2D], fov: f64) -> (Vec<ApproachZone>, bool) {
    let half = fov / 2.0;
    let seen = |s: &CircleSample| viewers.iter().all(|v| in_cone(v, s.point(), half));
    let kept: Vec<ApproachZone> = zones
        .iter()
        .flat_map(|z| runs(&z.samples, false, seen))
        .map(ApproachZone::new)
        .collect();
    if kept.is_empty() {
        (zones.to_vec(), true)
    } else {
        (kept, false)
    }
}

pub fn filter_width(zones: Vec<ApproachZone>, s_r: f64) -> Vec<ApproachZone> {
    zones.into_iter().filter(|z| z.width >= s_r).collect()
}

pub fn narrowed_fov(cfg: &ApproachConfig, approach_radius: f64, initial_radius: f64) -> f64 {
    if initial_radius <= 0.0 {
        return cfg.f_ifov;
    }
    (cfg.f_ifov / (cfg.f_mod * approach_radius / initial_radius)).min(cfg.f_ifov)
}

pub fn velocity_scaled_step(cfg: &ApproachConfig, speed: f64) -> f64 {
    cfg.step.max(cfg.step * speed * cfg.v_mod)
}

pub fn expanded_radius_limit(cfg: &ApproachConfig, speed: f64, robot_distance: f64) -> f64 {
    let d_mod = crate::adaptation::distance_modifier(robot_distance, cfg.d_a_limit);
    (cfg.max_radius + cfg.a_a_limit).min(cfg.max_radius * (1.0 + d_mod * cfg.a_a_adapt * speed))
}

/// Distance ahead of a person where their field drops below `threshold`.
pub fn frontal_extent(params: &GaussianParams, threshold: u8) -> f64 {
    let level = threshold as f64 - 1.0;
    if level <= 0.0 {
        return f64::INFINITY;
    }
    if params.amplitude <= level {
        return 0.0;
    }
    2.0 * params.sigma_f * (params.amplitude / level).ln().sqrt()
}

/// First search circle around a lone person.
pub fn person_initial_radius(params: &GaussianParams, cfg: &ApproachConfig) -> f64 {
    cfg.initial_radius_person.max(frontal_extent(params, cfg.free_threshold))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachQuery {
    pub target: Target,
    pub robot: Pose2D,
    /// Robot lateral size used by the width check.
    pub s_r: f64,
    /// Step scaling, limit expansion and field-of-view narrowing.
    pub adaptive: bool,
    /// Overrides the first circle radius.
    pub initial_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusRecord {
    pub radius: f64,
    pub fov: f64,
    pub samples: Vec<CircleSample>,
    pub zones: usize,
    pub after_fov: usize,
    pub fov_fallback: bool,
    pub after_width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachReport {
    pub target: Target,
    pub initial_radius: f64,
    pub radius_limit: f64,
    pub step: f64,
    pub radii: Vec<RadiusRecord>,
    pub pose: Option<ApproachPose>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no valid approach pose")]
pub struct NoValidPose;

pub fn estimate_approach_pose(
    costmap: &Costmap,
    scene: &SceneState,
    query: &ApproachQuery,
    cfg: &ApproachConfig,
) -> Result<ApproachPose, NoValidPose> {
    search(costmap, scene, query, cfg, false).pose.ok_or(NoValidPose)
}

/// Same search, keeping every sampled circle for plotting.
pub fn estimate_approach_pose_traced(
    costmap: &Costmap,
    scene: &SceneState,
    query: &ApproachQuery,
    cfg: &ApproachConfig,
) -> ApproachReport {
    search(costmap, scene, query, cfg, true)
}

fn search(
    costmap: &Costmap,
    scene: &SceneState,
    query: &ApproachQuery,
    cfg: &ApproachConfig,
    keep_records: bool,
) -> ApproachReport {
    let mut report = ApproachReport {
        target: query.target.clone(),
        initial_radius: 0.0,
        radius_limit: 0.0,
        step: cfg.step,
        radii: Vec::new(),
        pose: None,
    };
    let (center, speed, default_r0) = match &query.target {
        Target::Person(id) => match scene.person(id) {
            Some(p) => (p.position(), p.speed(), person_initial_radius(&p.params, cfg)),
            None => return report,
        },
        Target::Group(id) => match scene.group(id) {
            Some(g) => (g.center, g.speed(), g.radius),
            None => return report,
        },
    };
    let r0 = query.initial_radius.unwrap_or(default_r0);
    let robot_distance = (query.robot.position() - center).norm();
    let (step, expansion) = if query.adaptive {
        (
            velocity_scaled_step(cfg, speed),
            expanded_radius_limit(cfg, speed, robot_distance),
        )
    } else {
        (cfg.step, cfg.max_radius)
    };
    report.initial_radius = r0;
    report.radius_limit = r0 + expansion;
    report.step = step;
    if r0 <= 0.0 {
        return report;
    }
    let viewers = viewers(scene, &query.target);
    let res = costmap.spec().resolution;

    let mut k = 0usize;
    loop {
        let radius = r0 + k as f64 * step;
        if radius > report.radius_limit + 1e-9 {
            break;
        }
        k += 1;
        let fov = if query.adaptive {
            narrowed_fov(cfg, radius, r0)
        } else {
            cfg.f_ifov
        };
        let samples = sample_circumference(costmap, center, radius, sample_count(radius, res), cfg.free_threshold);
        let zones = extract_zones(&samples);
        let n_zones = zones.len();
        let (seen, fallback) = filter_fov(&zones, &viewers, fov);
        let after_fov = seen.len();
        let valid = filter_width(seen, query.s_r);
        if keep_records {
            report.radii.push(RadiusRecord {
                radius,
                fov,
                samples,
                zones: n_zones,
                after_fov,
                fov_fallback: fallback,
                after_width: valid.len(),
            });
        }
        if valid.is_empty() {
            continue;
        }
        let robot = query.robot.position();
        let mut best: Option<(f64, usize, usize, &CircleSample)> = None;
        for (zone_id, zone) in valid.iter().enumerate() {
            for s in &zone.samples {
                let d = (s.point() - robot).norm();
                let better = match best {
                    None => true,
                    Some((bd, bi, _, _)) => d < bd || (d == bd && s.index < bi),
                };
                if better {
                    best = Some((d, s.index, zone_id, s));
                }
            }
        }
        let (_, _, zone_id, s) = best.expect("valid zones are non-empty");
        let to_center = center - s.point();
        report.pose = Some(ApproachPose {
            x: s.x,
            y: s.y,
            heading: to_center.y.atan2(to_center.x),
            radius_used: radius,
            zone_id,
            fov_fallback: fallback,
        });
        break;
    }
    report
}

/// Re-acquires the target as the nearest lone person or group to where it
/// was last seen.
pub fn track_target(scene: &SceneState, last_center: Point2<f64>, track_threshold: f64) -> Option<Target> {
    let groups = scene
        .groups
        .iter()
        .map(|g| (Target::Group(g.id.clone()), g.center));
    let persons = scene
        .lone_persons()
        .map(|p| (Target::Person(p.id.clone()), p.position()));
    let mut best: Option<(f64, Target)> = None;
    for (t, c) in groups.chain(persons) {
        let d = (c - last_center).norm();
        if d <= track_threshold && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, t));
        }
    }
    best.map(|(_, t)| t)
}

/// Arc length of width-valid free zones on a circle.
pub fn approach_perimeter(
    costmap: &Costmap,
    center: Point2<f64>,
    radius: f64,
    cfg: &ApproachConfig,
    s_r: f64,
) -> f64 {
    if radius <= 0.0 {
        return 0.0;
    }
    let n = sample_count(radius, costmap.spec().resolution);
    let samples = sample_circumference(costmap, center, radius, n, cfg.free_threshold);
    let free: usize = filter_width(extract_zones(&samples), s_r)
        .iter()
        .map(|z| z.samples.len())
        .sum();
    free as f64 * 2.0 * PI * radius / n as f64
}
