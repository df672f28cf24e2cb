//! Run configuration: one file holding every tunable, with experiment defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adaptation::{AdaptationConfig, VelocityAdaptConfig};
use crate::approach::ApproachConfig;
use crate::costmap::{GridSpec, InflationParams};
use crate::error::{Error, Result};
use crate::eval::{EvalConfig, SweepSpec};
use crate::social_field::{GaussianParams, GroupSpaceModel, DEFAULT_AMPLITUDE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotLimits {
    pub v_max: f64,
    pub w_max: f64,
    pub a_max: f64,
}

impl Default for RobotLimits {
    fn default() -> Self {
        Self {
            v_max: 0.6,
            w_max: 1.2,
            a_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub dt: f64,
    pub replan_period: f64,
    /// A* weight per cost unit per cell.
    pub cost_weight: f64,
    pub clearing_radius: f64,
    pub inflation: InflationParams,
    pub limits: RobotLimits,
    pub lookahead: f64,
    /// Heading error accepted at the goal, radians.
    pub heading_tolerance: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            replan_period: 0.5,
            cost_weight: 0.02,
            clearing_radius: 0.45,
            inflation: InflationParams::default(),
            limits: RobotLimits::default(),
            lookahead: 0.3,
            heading_tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Baseline personal-space parameters.
    pub person: GaussianParams,
    pub group: GroupSpaceModel,
    pub adaptation: AdaptationConfig,
    pub velocity: VelocityAdaptConfig,
    pub approach: ApproachConfig,
    pub eval: EvalConfig,
    /// Grid used when a scenario brings no static map.
    pub grid: GridSpec,
    pub sim: SimParams,
    /// Robot and spacing values swept by the dataset study.
    pub sweep: SweepSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            person: GaussianParams::new(DEFAULT_AMPLITUDE, 1.2, 0.5, 0.4, 0.4),
            group: GroupSpaceModel::default(),
            adaptation: AdaptationConfig::default(),
            velocity: VelocityAdaptConfig::default(),
            approach: ApproachConfig::default(),
            eval: EvalConfig::default(),
            grid: GridSpec::default(),
            sim: SimParams::default(),
            sweep: SweepSpec::default(),
        }
    }
}

impl RunConfig {
    /// Reads TOML or JSON by extension, then validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?,
            _ => toml::from_str(&text).map_err(|e| Error::parse(path, e))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if let Err(e) = self.person.validate() {
            errors.push(format!("person: {e}"));
        }
        let g = &self.group;
        if !(g.amplitude >= 0.0 && g.amplitude <= crate::social_field::LETHAL_COST) {
            errors.push(format!("group.amplitude must lie in [0, 254] (got {})", g.amplitude));
        }
        if !(g.sigma_ratio > 0.0) {
            errors.push(format!("group.sigma_ratio must be > 0 (got {})", g.sigma_ratio));
        }
        if !(g.min_sigma > 0.0) {
            errors.push(format!("group.min_sigma must be > 0 (got {})", g.min_sigma));
        }
        self.adaptation.validate("adaptation", &mut errors);
        self.velocity.validate("velocity", &mut errors);
        self.approach.validate("approach", &mut errors);
        self.eval.validate("eval", &mut errors);
        self.grid.validate("grid", &mut errors);
        let s = &self.sim;
        for (name, v) in [
            ("sim.dt", s.dt),
            ("sim.replan_period", s.replan_period),
            ("sim.lookahead", s.lookahead),
            ("sim.heading_tolerance", s.heading_tolerance),
            ("sim.limits.v_max", s.limits.v_max),
            ("sim.limits.w_max", s.limits.w_max),
            ("sim.limits.a_max", s.limits.a_max),
            ("sim.inflation.decay_rate", s.inflation.decay_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(format!("{name} must be > 0 (got {v})"));
            }
        }
        for (name, v) in [
            ("sim.cost_weight", s.cost_weight),
            ("sim.clearing_radius", s.clearing_radius),
            ("sim.inflation.inscribed_radius", s.inflation.inscribed_radius),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                errors.push(format!("{name} must be >= 0 (got {v})"));
            }
        }
        for (name, vals) in [("sweep.s_r", &self.sweep.s_r), ("sweep.s_h", &self.sweep.s_h)] {
            if let Some(v) = vals.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                errors.push(format!("{name} values must be > 0 (got {v})"));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errors))
        }
    }
}
