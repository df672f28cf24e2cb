//! Personal and group space models.
//!
//! Every human is modelled by an asymmetric Gaussian with four independent
//! deviations (front, rear, left, right). Groups get a Gaussian of the same
//! family centred on the group centre, with a single lateral deviation. The
//! global social field is the pointwise maximum over all of them.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{circular_mean, wrap_angle, Pose2D};

/// Costs at or above this value are lethal on the costmap scale.
pub const LETHAL_COST: f64 = 254.0;

/// Amplitude used for people and groups unless overridden.
pub const DEFAULT_AMPLITUDE: f64 = 211.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub amplitude: f64,
    pub sigma_f: f64,
    pub sigma_r: f64,
    pub sigma_sl: f64,
    pub sigma_sr: f64,
}

impl GaussianParams {
    pub fn new(amplitude: f64, sigma_f: f64, sigma_r: f64, sigma_sl: f64, sigma_sr: f64) -> Self {
        Self {
            amplitude,
            sigma_f,
            sigma_r,
            sigma_sl,
            sigma_sr,
        }
    }

    pub fn isotropic(amplitude: f64, sigma: f64) -> Self {
        Self::new(amplitude, sigma, sigma, sigma, sigma)
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [self.sigma_f, self.sigma_r, self.sigma_sl, self.sigma_sr];
        if sigmas.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParams(format!(
                "deviations must be finite and positive, got {sigmas:?}"
            )));
        }
        if !(self.amplitude.is_finite() && (0.0..=LETHAL_COST).contains(&self.amplitude)) {
            return Err(Error::InvalidParams(format!(
                "amplitude {} outside [0, {LETHAL_COST}]",
                self.amplitude
            )));
        }
        Ok(())
    }

    pub fn max_sigma(&self) -> f64 {
        self.sigma_f
            .max(self.sigma_r)
            .max(self.sigma_sl)
            .max(self.sigma_sr)
    }
}

/// Altered asymmetric Gaussian evaluated at `query` for a space centred at
/// `center`.
///
/// The heading offset is wrapped into `(-π, π]` before the quadrant tests;
/// the front/rear test uses a strict `|α| < π/2`, so a query exactly abeam
/// takes the rear deviation.
pub fn altered_asymmetric_gaussian(
    query: Point2<f64>,
    center: &Pose2D,
    params: &GaussianParams,
) -> f64 {
    let dx = query.x - center.x;
    let dy = query.y - center.y;
    let theta = dy.atan2(dx);
    let alpha = wrap_angle(theta - center.theta);

    let sigma_x = if alpha.abs() < FRAC_PI_2 {
        params.sigma_f
    } else {
        params.sigma_r
    };
    let sigma_y = if alpha < 0.0 {
        params.sigma_sr
    } else {
        params.sigma_sl
    };

    let d = (dx * dx + dy * dy).sqrt();
    let a = d * alpha.cos() / (2.0 * sigma_x);
    let b = d * alpha.sin() / (2.0 * sigma_y);
    params.amplitude * (-(a * a + b * b)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonState {
    pub id: String,
    pub pose: Pose2D,
    pub velocity: Vector2<f64>,
    pub params: GaussianParams,
}

impl PersonState {
    pub fn new(id: impl Into<String>, pose: Pose2D, params: GaussianParams) -> Self {
        Self {
            id: id.into(),
            pose,
            velocity: Vector2::zeros(),
            params,
        }
    }

    pub fn with_velocity(mut self, vx: f64, vy: f64) -> Self {
        self.velocity = Vector2::new(vx, vy);
        self
    }

    pub fn position(&self) -> Point2<f64> {
        self.pose.position()
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn field_at(&self, query: Point2<f64>) -> f64 {
        altered_asymmetric_gaussian(query, &self.pose, &self.params)
    }
}

/// How group-space parameters follow from the group geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupSpaceModel {
    pub amplitude: f64,
    /// Group deviation as a fraction of the group radius.
    pub sigma_ratio: f64,
    pub min_sigma: f64,
}

impl Default for GroupSpaceModel {
    fn default() -> Self {
        Self {
            amplitude: DEFAULT_AMPLITUDE,
            sigma_ratio: 0.5,
            min_sigma: 0.225,
        }
    }
}

impl GroupSpaceModel {
    pub fn params_for_radius(&self, radius: f64) -> GaussianParams {
        GaussianParams::isotropic(self.amplitude, (self.sigma_ratio * radius).max(self.min_sigma))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupState {
    pub id: String,
    pub center: Point2<f64>,
    pub radius: f64,
    pub orientation: f64,
    pub velocity: Vector2<f64>,
    /// Member ids in counter-clockwise order of polar angle about the centre.
    pub members: Vec<String>,
    pub params: GaussianParams,
}

impl GroupState {
    /// Derives centre, radius, orientation and mean velocity from the members.
    pub fn from_members(
        id: impl Into<String>,
        members: &[&PersonState],
        model: &GroupSpaceModel,
    ) -> Result<Self> {
        let id = id.into();
        if members.is_empty() {
            return Err(Error::InvalidScene(format!("group `{id}` has no members")));
        }
        let n = members.len() as f64;
        let center = Point2::from(
            members
                .iter()
                .fold(Vector2::zeros(), |acc, p| acc + p.position().coords)
                / n,
        );
        let radius = members
            .iter()
            .map(|p| (p.position() - center).norm())
            .sum::<f64>()
            / n;
        let velocity = members.iter().fold(Vector2::zeros(), |acc, p| acc + p.velocity) / n;

        let moving = members
            .iter()
            .filter(|p| p.speed() > 1e-9)
            .map(|p| p.velocity.y.atan2(p.velocity.x));
        // At rest the velocity average is undefined; fall back to body
        // orientations, then to zero for perfectly opposed members.
        let orientation = circular_mean(moving)
            .or_else(|| circular_mean(members.iter().map(|p| p.pose.theta)))
            .unwrap_or(0.0);

        let mut ordered: Vec<(f64, &str)> = members
            .iter()
            .map(|p| {
                let d = p.position() - center;
                (d.y.atan2(d.x), p.id.as_str())
            })
            .collect();
        ordered.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));

        let mut params = model.params_for_radius(radius);
        params.sigma_sr = params.sigma_sl;
        Ok(Self {
            id,
            center,
            radius,
            orientation,
            velocity,
            members: ordered.into_iter().map(|(_, id)| id.to_string()).collect(),
            params,
        })
    }

    pub fn pose(&self) -> Pose2D {
        Pose2D::new(self.center.x, self.center.y, self.orientation)
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn field_at(&self, query: Point2<f64>) -> f64 {
        altered_asymmetric_gaussian(query, &self.pose(), &self.params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SceneState {
    pub persons: Vec<PersonState>,
    pub groups: Vec<GroupState>,
    pub timestamp: f64,
}

impl SceneState {
    pub fn new(persons: Vec<PersonState>, groups: Vec<GroupState>) -> Result<Self> {
        let scene = Self {
            persons,
            groups,
            timestamp: 0.0,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for p in &self.persons {
            if !ids.insert(p.id.as_str()) {
                return Err(Error::InvalidScene(format!("duplicate person id `{}`", p.id)));
            }
            p.params.validate()?;
            if !(p.velocity.x.is_finite() && p.velocity.y.is_finite()) {
                return Err(Error::InvalidScene(format!("person `{}` has non-finite velocity", p.id)));
            }
        }
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for g in &self.groups {
            g.params.validate()?;
            for m in &g.members {
                if !ids.contains(m.as_str()) {
                    return Err(Error::InvalidScene(format!(
                        "group `{}` references unknown person `{m}`",
                        g.id
                    )));
                }
                if let Some(other) = owner.insert(m, &g.id) {
                    return Err(Error::InvalidScene(format!(
                        "person `{m}` belongs to both `{other}` and `{}`",
                        g.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn person(&self, id: &str) -> Option<&PersonState> {
        self.persons.iter().find(|p| p.id == id)
    }

    pub fn person_mut(&mut self, id: &str) -> Option<&mut PersonState> {
        self.persons.iter_mut().find(|p| p.id == id)
    }

    pub fn group(&self, id: &str) -> Option<&GroupState> {
        self.groups.iter().find(|g| g.id == id)
    }

    pub fn group_of(&self, person_id: &str) -> Option<&GroupState> {
        self.groups
            .iter()
            .find(|g| g.members.iter().any(|m| m == person_id))
    }

    /// Persons that are not part of any group.
    pub fn lone_persons(&self) -> impl Iterator<Item = &PersonState> {
        self.persons
            .iter()
            .filter(move |p| self.group_of(&p.id).is_none())
    }

    /// Recomputes every group's geometry from its current members, resetting
    /// group parameters from `model`.
    pub fn rederive_groups(&mut self, model: &GroupSpaceModel) -> Result<()> {
        let mut groups = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let members = g
                .members
                .iter()
                .map(|m| self.person(m).ok_or_else(|| Error::UnknownEntity(m.clone())))
                .collect::<Result<Vec<_>>>()?;
            groups.push(GroupState::from_members(g.id.clone(), &members, model)?);
        }
        self.groups = groups;
        Ok(())
    }

    pub fn max_amplitude(&self) -> f64 {
        self.persons
            .iter()
            .map(|p| p.params.amplitude)
            .chain(self.groups.iter().map(|g| g.params.amplitude))
            .fold(0.0, f64::max)
    }
}

pub fn merged_personal_field(scene: &SceneState, query: Point2<f64>) -> f64 {
    scene
        .persons
        .iter()
        .map(|p| p.field_at(query))
        .fold(0.0, f64::max)
}

pub fn merged_group_field(scene: &SceneState, query: Point2<f64>) -> f64 {
    scene
        .groups
        .iter()
        .map(|g| g.field_at(query))
        .fold(0.0, f64::max)
}

pub fn global_field(scene: &SceneState, query: Point2<f64>) -> f64 {
    merged_personal_field(scene, query).max(merged_group_field(scene, query))
}
