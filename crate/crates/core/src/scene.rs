//! Scene documents: the on-disk form of a [`SceneState`].

use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose2D;
use crate::social_field::{GaussianParams, GroupSpaceModel, GroupState, PersonState, SceneState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonDoc {
    pub id: String,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_sl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_sr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDoc {
    pub id: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneDoc {
    #[serde(default)]
    pub persons: Vec<PersonDoc>,
    #[serde(default)]
    pub groups: Vec<GroupDoc>,
}

impl PersonDoc {
    pub fn to_person(&self, defaults: &GaussianParams) -> PersonState {
        let params = GaussianParams {
            amplitude: self.amplitude.unwrap_or(defaults.amplitude),
            sigma_f: self.sigma_f.unwrap_or(defaults.sigma_f),
            sigma_r: self.sigma_r.unwrap_or(defaults.sigma_r),
            sigma_sl: self.sigma_sl.unwrap_or(defaults.sigma_sl),
            sigma_sr: self.sigma_sr.unwrap_or(defaults.sigma_sr),
        };
        PersonState {
            id: self.id.clone(),
            pose: Pose2D::new(self.x, self.y, self.theta),
            velocity: Vector2::new(self.vx, self.vy),
            params,
        }
    }
}

impl SceneDoc {
    /// Builds the scene; group geometry is derived from the members.
    pub fn to_scene(&self, defaults: &GaussianParams, model: &GroupSpaceModel) -> Result<SceneState> {
        let persons: Vec<PersonState> = self.persons.iter().map(|p| p.to_person(defaults)).collect();
        for p in &persons {
            p.params
                .validate()
                .map_err(|e| Error::InvalidScene(format!("person `{}`: {e}", p.id)))?;
        }
        let mut groups = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let mut members = Vec::with_capacity(g.members.len());
            for m in &g.members {
                let p = persons
                    .iter()
                    .find(|p| &p.id == m)
                    .ok_or_else(|| Error::InvalidScene(format!("group `{}` references unknown person `{m}`", g.id)))?;
                members.push(p);
            }
            groups.push(GroupState::from_members(g.id.clone(), &members, model)?);
        }
        SceneState::new(persons, groups)
    }

    pub fn from_scene(scene: &SceneState) -> Self {
        Self {
            persons: scene
                .persons
                .iter()
                .map(|p| PersonDoc {
                    id: p.id.clone(),
                    x: p.pose.x,
                    y: p.pose.y,
                    theta: p.pose.theta,
                    vx: p.velocity.x,
                    vy: p.velocity.y,
                    amplitude: Some(p.params.amplitude),
                    sigma_f: Some(p.params.sigma_f),
                    sigma_r: Some(p.params.sigma_r),
                    sigma_sl: Some(p.params.sigma_sl),
                    sigma_sr: Some(p.params.sigma_sr),
                })
                .collect(),
            groups: scene
                .groups
                .iter()
                .map(|g| GroupDoc {
                    id: g.id.clone(),
                    members: g.members.clone(),
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }
}
