//! Adaptation of space-model parameters.
//!
//! Three independent procedures act on [`GaussianParams`]:
//! a frontal shrink for a lone approach target, a lateral shrink of group
//! members wherever the robot fits between neighbours, and a frontal growth
//! driven by walking speed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Pose2D};
use crate::social_field::{GaussianParams, PersonState, SceneState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptationConfig {
    /// Frontal shrink applied to a lone approach target.
    pub zeta: f64,
    /// Clearance kept beside every person.
    pub s_h: f64,
    /// Lateral size of the robot.
    pub s_r: f64,
    pub intimate_radius: f64,
    pub half_human_width: f64,
    /// Accepted range of `|θ_person − θ_neighbour|` for the lateral shrink.
    pub orientation_diff_bounds: (f64, f64),
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        Self {
            zeta: 0.3,
            s_h: 0.375,
            s_r: 0.8,
            intimate_radius: 0.45,
            half_human_width: 0.225,
            orientation_diff_bounds: (FRAC_PI_4, 3.0 * FRAC_PI_4),
        }
    }
}

impl AdaptationConfig {
    pub fn validate(&self, prefix: &str, errors: &mut Vec<String>) {
        if !(self.zeta >= 0.0) {
            errors.push(format!("{prefix}.zeta must be >= 0 (got {})", self.zeta));
        }
        if !(self.half_human_width > 0.0) {
            errors.push(format!("{prefix}.half_human_width must be > 0"));
        }
        if !(self.s_h >= self.half_human_width) {
            errors.push(format!(
                "{prefix}.s_h must be >= half_human_width {} (got {})",
                self.half_human_width, self.s_h
            ));
        }
        if !(self.s_r > 0.0) {
            errors.push(format!("{prefix}.s_r must be > 0 (got {})", self.s_r));
        }
        if !(self.intimate_radius > 0.0) {
            errors.push(format!("{prefix}.intimate_radius must be > 0"));
        }
        let (lo, hi) = self.orientation_diff_bounds;
        if !(lo < hi) {
            errors.push(format!(
                "{prefix}.orientation_diff_bounds must satisfy min < max (got ({lo}, {hi}))"
            ));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VelocityAdaptConfig {
    pub a_adapt: f64,
    pub a_limit: f64,
    pub d_limit: f64,
}

impl Default for VelocityAdaptConfig {
    fn default() -> Self {
        Self {
            a_adapt: 1.5,
            a_limit: 1.0,
            d_limit: 6.0,
        }
    }
}

impl VelocityAdaptConfig {
    pub fn validate(&self, prefix: &str, errors: &mut Vec<String>) {
        for (name, v) in [
            ("a_adapt", self.a_adapt),
            ("a_limit", self.a_limit),
            ("d_limit", self.d_limit),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                errors.push(format!("{prefix}.{name} must be finite and >= 0 (got {v})"));
            }
        }
    }
}

pub fn adapt_individual_target(params: GaussianParams, cfg: &AdaptationConfig) -> GaussianParams {
    let shrunk = cfg.intimate_radius.max(params.sigma_f - cfg.zeta);
    GaussianParams {
        sigma_f: params.sigma_f.min(shrunk),
        ..params
    }
}

/// Clearance points beside a person and beside the facing sides of their
/// neighbours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideAnchors {
    pub left: Point2<f64>,
    pub right: Point2<f64>,
    /// Right-hand point of the left neighbour.
    pub left_adj: Point2<f64>,
    /// Left-hand point of the right neighbour.
    pub right_adj: Point2<f64>,
}

fn offset(pose: &Pose2D, angle: f64, dist: f64) -> Point2<f64> {
    Point2::new(pose.x + dist * angle.cos(), pose.y + dist * angle.sin())
}

pub fn side_anchor_points(
    person: &Pose2D,
    left_neighbor: &Pose2D,
    right_neighbor: &Pose2D,
    s_h: f64,
) -> SideAnchors {
    SideAnchors {
        left: offset(person, person.theta + FRAC_PI_2, s_h),
        right: offset(person, person.theta - FRAC_PI_2, s_h),
        left_adj: offset(left_neighbor, left_neighbor.theta - FRAC_PI_2, s_h),
        right_adj: offset(right_neighbor, right_neighbor.theta + FRAC_PI_2, s_h),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Lateral deviation admitted on one side, or `None` when that side is left
/// untouched (gap too narrow, orientation gate closed, degenerate anchors).
fn side_limit(
    person: &Pose2D,
    neighbor: &Pose2D,
    side: Side,
    cfg: &AdaptationConfig,
) -> Option<f64> {
    let (own, adj) = match side {
        Side::Left => (
            offset(person, person.theta + FRAC_PI_2, cfg.s_h),
            offset(neighbor, neighbor.theta - FRAC_PI_2, cfg.s_h),
        ),
        Side::Right => (
            offset(person, person.theta - FRAC_PI_2, cfg.s_h),
            offset(neighbor, neighbor.theta + FRAC_PI_2, cfg.s_h),
        ),
    };
    let gap = (adj - own).norm();
    if gap < 1e-12 || gap < cfg.s_r {
        return None;
    }
    let diff = wrap_angle(person.theta - neighbor.theta).abs();
    let (lo, hi) = cfg.orientation_diff_bounds;
    if diff < lo || diff > hi {
        return None;
    }
    // edge of a robot centred in the gap, on this person's side
    let toward_neighbor = (adj - own) / gap;
    let edge = own + 0.5 * (gap - cfg.s_r) * toward_neighbor;
    let lateral = Vector2::new(-person.theta.sin(), person.theta.cos());
    let projected = (edge - person.position()).dot(&lateral).abs();
    Some(projected)
}

/// Narrows the lateral deviations of `person` towards neighbours that leave
/// enough room for the robot. Frontal/rear deviations and amplitude are kept.
pub fn adapt_group_member(
    person: &PersonState,
    left: Option<&PersonState>,
    right: Option<&PersonState>,
    cfg: &AdaptationConfig,
) -> GaussianParams {
    let mut params = person.params;
    let shrink = |sigma: f64, limit: Option<f64>| match limit {
        Some(d_aux) => sigma.min(d_aux.max(cfg.half_human_width)),
        None => sigma,
    };
    if let Some(l) = left {
        params.sigma_sl = shrink(params.sigma_sl, side_limit(&person.pose, &l.pose, Side::Left, cfg));
    }
    if let Some(r) = right {
        params.sigma_sr = shrink(params.sigma_sr, side_limit(&person.pose, &r.pose, Side::Right, cfg));
    }
    params
}

/// Splits the two circular neighbours of a member into (left, right) by which
/// side of the member they stand on. A single neighbour goes to the side it
/// lies on.
fn classify_neighbors<'a>(
    person: &PersonState,
    prev: &'a PersonState,
    next: &'a PersonState,
) -> (Option<&'a PersonState>, Option<&'a PersonState>) {
    let lat = |p: &PersonState| person.pose.to_local(&p.position()).y;
    if prev.id == next.id {
        return if lat(prev) >= 0.0 {
            (Some(prev), None)
        } else {
            (None, Some(prev))
        };
    }
    if lat(prev) >= lat(next) {
        (Some(prev), Some(next))
    } else {
        (Some(next), Some(prev))
    }
}

pub fn adapt_group(scene: &SceneState, group_id: &str, cfg: &AdaptationConfig) -> Result<SceneState> {
    let group = scene
        .group(group_id)
        .ok_or_else(|| Error::UnknownEntity(group_id.to_string()))?;
    let mut out = scene.clone();
    let n = group.members.len();
    if n < 2 {
        return Ok(out);
    }
    let members = group
        .members
        .iter()
        .map(|m| scene.person(m).ok_or_else(|| Error::UnknownEntity(m.clone())))
        .collect::<Result<Vec<_>>>()?;
    for (i, person) in members.iter().enumerate() {
        let prev = members[(i + n - 1) % n];
        let next = members[(i + 1) % n];
        let (left, right) = classify_neighbors(person, prev, next);
        let params = adapt_group_member(person, left, right, cfg);
        if let Some(p) = out.person_mut(&person.id) {
            p.params = params;
        }
    }
    Ok(out)
}

/// Distance attenuation of the velocity adaptation.
pub fn distance_modifier(robot_distance: f64, d_limit: f64) -> f64 {
    if robot_distance <= d_limit {
        if d_limit <= 0.0 {
            return 1.0;
        }
        (2.0 * robot_distance / d_limit).min(1.0)
    } else {
        1.0
    }
}

/// Speed-driven growth of a frontal extent (a deviation or a search radius).
pub fn adapt_velocity(sigma_f: f64, speed: f64, robot_distance: f64, cfg: &VelocityAdaptConfig) -> f64 {
    let d_mod = distance_modifier(robot_distance, cfg.d_limit);
    (sigma_f + cfg.a_limit).min(sigma_f * (1.0 + d_mod * cfg.a_adapt * speed))
}

/// What the robot is asked to approach.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Target {
    Person(String),
    Group(String),
}

impl Target {
    pub fn id(&self) -> &str {
        match self {
            Target::Person(id) | Target::Group(id) => id,
        }
    }

    /// Resolves a bare id against a scene: groups first, then persons.
    pub fn resolve(scene: &SceneState, id: &str) -> Option<Target> {
        if scene.group(id).is_some() {
            Some(Target::Group(id.to_string()))
        } else if scene.person(id).is_some() {
            Some(Target::Person(id.to_string()))
        } else {
            None
        }
    }

    pub fn center(&self, scene: &SceneState) -> Option<Point2<f64>> {
        match self {
            Target::Person(id) => scene.person(id).map(|p| p.position()),
            Target::Group(id) => scene.group(id).map(|g| g.center),
        }
    }

    pub fn speed(&self, scene: &SceneState) -> Option<f64> {
        match self {
            Target::Person(id) => scene.person(id).map(|p| p.speed()),
            Target::Group(id) => scene.group(id).map(|g| g.speed()),
        }
    }
}

/// Composes the adaptations for one tick on top of a scene whose parameters
/// hold the configured baselines: velocity growth, then group narrowing,
/// then the frontal shrink of a lone target.
pub fn adapt_scene(
    baseline: &SceneState,
    target: Option<&Target>,
    robot: Point2<f64>,
    cfg: &AdaptationConfig,
    vel: &VelocityAdaptConfig,
) -> Result<SceneState> {
    let mut scene = baseline.clone();
    for p in &mut scene.persons {
        let d = (p.position() - robot).norm();
        p.params.sigma_f = adapt_velocity(p.params.sigma_f, p.speed(), d, vel);
    }
    for g in &mut scene.groups {
        let d = (g.center - robot).norm();
        g.params.sigma_f = adapt_velocity(g.params.sigma_f, g.speed(), d, vel);
    }
    let ids: Vec<String> = scene.groups.iter().map(|g| g.id.clone()).collect();
    for id in ids {
        scene = adapt_group(&scene, &id, cfg)?;
    }
    if let Some(Target::Person(id)) = target {
        if scene.group_of(id).is_none() {
            if let Some(p) = scene.person_mut(id) {
                p.params = adapt_individual_target(p.params, cfg);
            }
        }
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;
    use crate::social_field::{GroupSpaceModel, GroupState};

    fn params(sf: f64, ss: f64) -> GaussianParams {
        GaussianParams::new(211.0, sf, 0.5, ss, ss)
    }

    #[test]
    fn individual_shrink_examples() {
        let cfg = AdaptationConfig::default();
        let f = |s| adapt_individual_target(params(s, 0.4), &cfg).sigma_f;
        assert!((f(1.2) - 0.9).abs() < 1e-12);
        assert_eq!(f(0.5), 0.45);
        assert_eq!(f(0.4), 0.4);
        let p = adapt_individual_target(params(1.2, 0.4), &cfg);
        assert_eq!((p.sigma_r, p.sigma_sl, p.sigma_sr, p.amplitude), (0.5, 0.4, 0.4, 211.0));
    }

    #[test]
    fn anchors_facing_x() {
        let me = Pose2D::new(0.0, 0.0, 0.0);
        let a = side_anchor_points(&me, &me, &me, 0.375);
        assert!((a.left - Point2::new(0.0, 0.375)).norm() < 1e-12);
        assert!((a.right - Point2::new(0.0, -0.375)).norm() < 1e-12);
        // with the person as its own neighbour the adjacent points swap sides
        assert!((a.left_adj - a.right).norm() < 1e-12);
        assert!((a.right_adj - a.left).norm() < 1e-12);
    }

    #[test]
    fn anchors_facing_y_and_zero_clearance() {
        let me = Pose2D::new(1.0, 2.0, FRAC_PI_2);
        let l = Pose2D::new(-1.0, 2.0, 0.3);
        let r = Pose2D::new(3.0, 2.0, -0.3);
        let a = side_anchor_points(&me, &l, &r, 0.375);
        assert!((a.left - Point2::new(1.0 - 0.375, 2.0)).norm() < 1e-12);
        let z = side_anchor_points(&me, &l, &r, 0.0);
        assert!((z.left - me.position()).norm() < 1e-12);
        assert!((z.right - me.position()).norm() < 1e-12);
        assert!((z.left_adj - l.position()).norm() < 1e-12);
        assert!((z.right_adj - r.position()).norm() < 1e-12);
    }

    /// Two people side by side, both facing +x, `sep` apart along y; the
    /// second one stands on the first one's left.
    fn side_by_side(sep: f64, ss: f64) -> (PersonState, PersonState) {
        let a = PersonState::new("a", Pose2D::new(0.0, 0.0, 0.0), params(1.2, ss));
        let b = PersonState::new("b", Pose2D::new(0.0, sep, 0.0), params(1.2, ss));
        (a, b)
    }

    fn gate_open() -> AdaptationConfig {
        // side-by-side neighbours have zero orientation difference
        AdaptationConfig {
            orientation_diff_bounds: (0.0, PI),
            ..AdaptationConfig::default()
        }
    }

    #[test]
    fn member_shrinks_toward_wide_gap() {
        let (a, b) = side_by_side(2.0, 1.0);
        let cfg = gate_open();
        let p = adapt_group_member(&a, Some(&b), None, &cfg);
        // independent construction: own anchor at y = s_h, the robot edge
        // sits (gap - s_r)/2 further along the gap
        let gap = 2.0 - 2.0 * cfg.s_h;
        let expect = cfg.s_h + (gap - cfg.s_r) / 2.0;
        assert!((expect - 0.6).abs() < 1e-12);
        assert!((p.sigma_sl - 0.6).abs() < 1e-12);
        assert_eq!(p.sigma_sr, 1.0);
        assert_eq!((p.sigma_f, p.sigma_r, p.amplitude), (1.2, 0.5, 211.0));
        // already narrower: untouched
        let (a, b) = side_by_side(2.0, 0.5);
        assert_eq!(adapt_group_member(&a, Some(&b), None, &cfg).sigma_sl, 0.5);
    }

    #[test]
    fn member_keeps_narrow_gap() {
        let (a, b) = side_by_side(1.5, 1.0);
        let p = adapt_group_member(&a, Some(&b), None, &gate_open());
        assert_eq!(p, a.params);
    }

    #[test]
    fn member_floor_binds() {
        // s_h at the floor and a gap exactly the robot width: d_aux = 0.225
        // is reached; push further with a smaller clearance to hit the floor
        let cfg = AdaptationConfig {
            s_h: 0.05,
            half_human_width: 0.01,
            s_r: 0.3,
            orientation_diff_bounds: (0.0, PI),
            ..AdaptationConfig::default()
        };
        let (a, b) = side_by_side(0.4, 1.0);
        // gap 0.3 -> d_aux = 0.05, floored
        let p = adapt_group_member(&a, Some(&b), None, &cfg);
        assert!((p.sigma_sl - 0.05).abs() < 1e-12);
        let cfg = AdaptationConfig { half_human_width: 0.225, ..cfg };
        let p = adapt_group_member(&a, Some(&b), None, &cfg);
        assert_eq!(p.sigma_sl, 0.225);
    }

    #[test]
    fn degenerate_anchor_gap_is_skipped() {
        let cfg = gate_open();
        // neighbour positioned so its right anchor coincides with our left one
        let a = PersonState::new("a", Pose2D::new(0.0, 0.0, 0.0), params(1.2, 1.0));
        let b = PersonState::new("b", Pose2D::new(0.0, 2.0 * cfg.s_h, 0.0), params(1.2, 1.0));
        assert_eq!(adapt_group_member(&a, Some(&b), None, &cfg), a.params);
    }

    #[test]
    fn orientation_gate_blocks_vis_a_vis() {
        let a = PersonState::new("a", Pose2D::new(0.0, 0.0, FRAC_PI_2), params(1.2, 1.0));
        let b = PersonState::new("b", Pose2D::new(0.0, 3.0, -FRAC_PI_2), params(1.2, 1.0));
        let cfg = AdaptationConfig::default();
        assert_eq!(adapt_group_member(&a, Some(&b), Some(&b), &cfg), a.params);
    }

    fn ring_scene(n: usize, r: f64, ss: f64) -> SceneState {
        let persons: Vec<PersonState> = (0..n)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n as f64;
                PersonState::new(
                    format!("p{k}"),
                    Pose2D::new(r * phi.cos(), r * phi.sin(), phi + PI),
                    params(1.2, ss),
                )
            })
            .collect();
        let refs: Vec<&PersonState> = persons.iter().collect();
        let g = GroupState::from_members("g", &refs, &GroupSpaceModel::default()).unwrap();
        SceneState::new(persons, vec![g]).unwrap()
    }

    #[test]
    fn ring_adaptation_by_radius() {
        let cfg = AdaptationConfig::default();
        // anchor gap on a centre-facing square is (r - s_h)·√2
        for r in [0.5, 0.75] {
            let s = ring_scene(4, r, 0.6);
            assert_eq!(adapt_group(&s, "g", &cfg).unwrap(), s, "r = {r}");
        }
        let s = ring_scene(4, 1.0, 0.6);
        let out = adapt_group(&s, "g", &cfg).unwrap();
        let gap = (1.0 - cfg.s_h) * 2f64.sqrt();
        let expect = cfg.s_h + 0.5 * (gap - cfg.s_r) * FRAC_PI_4.cos();
        for p in &out.persons {
            assert!((p.params.sigma_sl - expect).abs() < 1e-12);
            assert!((p.params.sigma_sr - expect).abs() < 1e-12);
        }
        // with a human-sized robot the 0.75 m ring opens up
        let small = AdaptationConfig { s_r: 0.45, ..cfg };
        let s = ring_scene(4, 0.75, 0.6);
        let out = adapt_group(&s, "g", &small).unwrap();
        assert!(out.persons.iter().all(|p| p.params.sigma_sl < 0.6));
    }

    #[test]
    fn pair_uses_single_neighbour_side() {
        // L-shaped pair: a faces +x, b stands on a's left facing -y... rotate
        let a = PersonState::new("a", Pose2D::new(0.0, 0.0, 0.0), params(1.2, 1.0));
        let b = PersonState::new("b", Pose2D::new(1.0, 2.0, -FRAC_PI_2), params(1.2, 1.0));
        let refs = [&a, &b];
        let g = GroupState::from_members("g", &refs, &GroupSpaceModel::default()).unwrap();
        let s = SceneState::new(vec![a.clone(), b.clone()], vec![g]).unwrap();
        let out = adapt_group(&s, "g", &AdaptationConfig::default()).unwrap();
        let pa = out.person("a").unwrap().params;
        assert!(pa.sigma_sl < 1.0);
        assert_eq!(pa.sigma_sr, 1.0);
        let pb = out.person("b").unwrap().params;
        // a lies on b's right (b faces -y, a is towards -x)
        assert_eq!(pb.sigma_sl, 1.0);
        assert!(pb.sigma_sr < 1.0);
    }

    #[test]
    fn single_member_group_unchanged() {
        let a = PersonState::new("a", Pose2D::new(0.0, 0.0, 0.0), params(1.2, 1.0));
        let g = GroupState::from_members("g", &[&a], &GroupSpaceModel::default()).unwrap();
        let s = SceneState::new(vec![a], vec![g]).unwrap();
        assert_eq!(adapt_group(&s, "g", &AdaptationConfig::default()).unwrap(), s);
        assert!(adapt_group(&s, "nope", &AdaptationConfig::default()).is_err());
    }

    #[test]
    fn velocity_examples() {
        let cfg = VelocityAdaptConfig::default();
        assert_eq!(adapt_velocity(1.3, 0.0, 2.0, &cfg), 1.3);
        assert!((adapt_velocity(1.0, 1.0, 10.0, &cfg) - 2.0).abs() < 1e-12);
        assert!((adapt_velocity(1.0, 1.0, cfg.d_limit / 4.0, &cfg) - 1.75).abs() < 1e-12);
    }

    #[test]
    fn pipeline_order() {
        let base = params(1.2, 0.4);
        let p = PersonState::new("p", Pose2D::new(0.0, 0.0, 0.0), base).with_velocity(1.0, 0.0);
        let s = SceneState::new(vec![p], vec![]).unwrap();
        let target = Target::Person("p".into());
        let out = adapt_scene(
            &s,
            Some(&target),
            Point2::new(100.0, 0.0),
            &AdaptationConfig::default(),
            &VelocityAdaptConfig::default(),
        )
        .unwrap();
        // grown to 2.2 first, then shrunk by zeta
        assert!((out.persons[0].params.sigma_f - 1.9).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn individual_never_grows_and_respects_floor(sf in 0.05..3.0f64, zeta in 0.0..1.0f64) {
            let cfg = AdaptationConfig { zeta, ..AdaptationConfig::default() };
            let out = adapt_individual_target(params(sf, 0.4), &cfg).sigma_f;
            prop_assert!(out <= sf);
            if out < sf {
                prop_assert!(out >= cfg.intimate_radius);
            }
        }

        #[test]
        fn velocity_bounds_and_monotonicity(
            sf in 0.1..3.0f64, v in 0.0..3.0f64, dv in 0.0..1.0f64,
            d in 0.0..10.0f64, dd in 0.0..2.0f64,
        ) {
            let cfg = VelocityAdaptConfig::default();
            let out = adapt_velocity(sf, v, d, &cfg);
            prop_assert!(out >= sf);
            prop_assert!(out <= sf + cfg.a_limit + 1e-12);
            prop_assert!(adapt_velocity(sf, v + dv, d, &cfg) >= out);
            prop_assert!(adapt_velocity(sf, v, d + dd, &cfg) >= out - 1e-12);
        }

        #[test]
        fn group_adaptation_shrinks_and_is_idempotent(
            n in 2usize..6, r in 0.4..1.6f64, ss in 0.25..1.0f64, sh in 0.225..0.45f64,
            jitter in proptest::collection::vec((-0.2..0.2f64, -0.3..0.3f64), 6),
        ) {
            let mut s = ring_scene(n, r, ss);
            for (p, (dr, dth)) in s.persons.iter_mut().zip(&jitter) {
                let pos = p.position().coords * (1.0 + dr);
                p.pose = Pose2D::new(pos.x, pos.y, p.pose.theta + dth);
            }
            s.rederive_groups(&GroupSpaceModel::default()).unwrap();
            let cfg = AdaptationConfig { s_h: sh, ..AdaptationConfig::default() };
            let once = adapt_group(&s, "g", &cfg).unwrap();
            let twice = adapt_group(&once, "g", &cfg).unwrap();
            prop_assert_eq!(&once, &twice);
            for (a, b) in s.persons.iter().zip(&once.persons) {
                prop_assert!(b.params.sigma_sl <= a.params.sigma_sl);
                prop_assert!(b.params.sigma_sr <= a.params.sigma_sr);
                prop_assert!(b.params.sigma_sl >= cfg.half_human_width);
                prop_assert!(b.params.sigma_sr >= cfg.half_human_width);
                prop_assert_eq!(b.params.sigma_f, a.params.sigma_f);
            }
        }
    }
}
