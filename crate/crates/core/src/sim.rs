//! Fixed-step kinematic simulation of scripted walkers and an approaching robot.

use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::adaptation::{adapt_individual_target, adapt_scene, Target};
use crate::approach::{
    estimate_approach_pose, estimate_approach_pose_traced, person_initial_radius, track_target, ApproachPose,
    ApproachQuery, ApproachReport,
};
use crate::config::{RunConfig, SimParams};
use crate::costmap::{compose, load_static_map, Costmap, GridSpec, LayerStack};
use crate::error::{Error, Result};
use crate::eval::{compute_sdi, compute_sgi, compute_sii, evaluate_trace, HsciSample};
use crate::geometry::{wrap_angle, Pose2D};
use crate::planner::plan_path;
use crate::scene::SceneDoc;
use crate::social_field::SceneState;

/// The four adaptation configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// No space adaptation, plain approach search.
    I,
    /// Plain space model, adaptive approach search.
    Ii,
    /// Adapted space model, plain approach search.
    Iii,
    /// Both adapted.
    Iv,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::I, Preset::Ii, Preset::Iii, Preset::Iv];

    pub fn space_adapt(self) -> bool {
        matches!(self, Preset::Iii | Preset::Iv)
    }

    pub fn approach_adapt(self) -> bool {
        matches!(self, Preset::Ii | Preset::Iv)
    }

    pub fn label(self) -> &'static str {
        match self {
            Preset::I => "i",
            Preset::Ii => "ii",
            Preset::Iii => "iii",
            Preset::Iv => "iv",
        }
    }

    pub fn parse(s: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.label() == s.trim().to_ascii_lowercase())
    }
}

/// Walk straight along the body heading until the robot comes close.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentScript {
    pub person: String,
    #[serde(default)]
    pub speed: f64,
    #[serde(default)]
    pub stop_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    /// ROS-style map YAML, relative to the scenario file.
    #[serde(default)]
    pub map: Option<PathBuf>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub scene: SceneDoc,
    #[serde(default)]
    pub scripts: Vec<AgentScript>,
    pub robot_start: Pose2D,
    pub target: String,
    #[serde(default = "all_presets")]
    pub configs: Vec<Preset>,
    pub duration: f64,
    #[serde(default)]
    pub dt: Option<f64>,
}

fn all_presets() -> Vec<Preset> {
    Preset::ALL.to_vec()
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if !(self.duration > 0.0) {
            errors.push(format!("duration must be > 0 (got {})", self.duration));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                errors.push(format!("dt must be > 0 (got {dt})"));
            }
        }
        for s in &self.scripts {
            if !self.scene.persons.iter().any(|p| p.id == s.person) {
                errors.push(format!("script references unknown person `{}`", s.person));
            }
            if !(s.speed >= 0.0 && s.stop_distance >= 0.0) {
                errors.push(format!("script `{}`: speed and stop_distance must be >= 0", s.person));
            }
        }
        if let Some(g) = &self.grid {
            g.validate("grid", &mut errors);
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errors))
        }
    }
}

/// Parses a scenario file holding one scenario or a list of them, loading
/// any static map they reference.
pub fn load_scenarios(path: &Path) -> Result<Vec<(Scenario, Option<Costmap>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    let list: Vec<Scenario> = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|s| vec![s])
    }
    .map_err(|e| Error::parse(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    list.into_iter()
        .map(|scenario| {
            scenario
                .validate()
                .map_err(|e| Error::parse(path, format!("scenario `{}`: {e}", scenario.name)))?;
            let map = match &scenario.map {
                Some(rel) => Some(load_static_map(&base.join(rel))?.costmap),
                None => None,
            };
            Ok((scenario, map))
        })
        .collect()
}

/// Single-scenario form of [`load_scenarios`].
pub fn load_scenario(path: &Path) -> Result<(Scenario, Option<Costmap>)> {
    let mut all = load_scenarios(path)?;
    if all.len() != 1 {
        return Err(Error::parse(path, format!("expected one scenario, found {}", all.len())));
    }
    Ok(all.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub pose: Pose2D,
    pub v: f64,
    pub w: f64,
}

impl RobotState {
    pub fn at(pose: Pose2D) -> Self {
        Self { pose, v: 0.0, w: 0.0 }
    }
}

/// Pure-pursuit step toward the waypoints, then a turn in place onto
/// `goal_heading` once the last waypoint is within `tolerance`.
pub fn follow_path(
    robot: &RobotState,
    waypoints: &[Point2<f64>],
    goal_heading: Option<f64>,
    tolerance: f64,
    params: &SimParams,
    dt: f64,
) -> RobotState {
    let lim = &params.limits;
    let pos = robot.pose.position();
    let (v_cmd, w_cmd) = match waypoints.last() {
        None => (0.0, 0.0),
        Some(goal) if (goal - pos).norm() <= tolerance => match goal_heading {
            Some(h) => {
                let err = wrap_angle(h - robot.pose.theta);
                if err.abs() > params.heading_tolerance / 2.0 {
                    (0.0, (2.0 * err).clamp(-lim.w_max, lim.w_max))
                } else {
                    (0.0, 0.0)
                }
            }
            None => (0.0, 0.0),
        },
        Some(goal) => {
            let aim = waypoints
                .iter()
                .find(|p| (*p - pos).norm() >= params.lookahead)
                .unwrap_or(goal);
            let to = aim - pos;
            let alpha = wrap_angle(to.y.atan2(to.x) - robot.pose.theta);
            if alpha.abs() > std::f64::consts::FRAC_PI_3 {
                (0.0, (2.0 * alpha).clamp(-lim.w_max, lim.w_max))
            } else {
                let remaining = (goal - pos).norm();
                let mut v = lim.v_max.min(1.5 * remaining);
                let mut w = v * 2.0 * alpha.sin() / to.norm().max(1e-9);
                if w.abs() > lim.w_max {
                    v *= lim.w_max / w.abs();
                    w = w.signum() * lim.w_max;
                }
                (v, w)
            }
        }
    };
    let dv = lim.a_max * dt;
    let v = v_cmd.clamp(robot.v - dv, robot.v + dv).clamp(0.0, lim.v_max);
    let w = w_cmd;
    let mid = robot.pose.theta + w * dt / 2.0;
    RobotState {
        pose: Pose2D::new(
            robot.pose.x + v * mid.cos() * dt,
            robot.pose.y + v * mid.sin() * dt,
            robot.pose.theta + w * dt,
        ),
        v,
        w,
    }
}

/// Advances scripted walkers by one tick; anyone closer to the robot than
/// their stop distance halts for good.
pub fn step_agents(
    scripts: &[AgentScript],
    scene: &mut SceneState,
    halted: &mut [bool],
    robot: Point2<f64>,
    dt: f64,
) {
    for (script, stopped) in scripts.iter().zip(halted.iter_mut()) {
        let Some(p) = scene.person_mut(&script.person) else {
            continue;
        };
        if !*stopped && (p.position() - robot).norm() < script.stop_distance {
            *stopped = true;
        }
        if *stopped || script.speed == 0.0 {
            p.velocity = Vector2::zeros();
            continue;
        }
        let v = script.speed * p.pose.heading();
        p.velocity = v;
        p.pose.x += v.x * dt;
        p.pose.y += v.y * dt;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    PoseReplanned,
    NoValidPose,
    PlanFailed,
    TargetLost,
    Retargeted,
    AgentHalted,
    GoalReached,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub t: f64,
    pub robot: Pose2D,
    pub v: f64,
    pub w: f64,
    /// Master-grid cost under the robot centre.
    pub robot_cell_cost: u8,
    pub persons: Vec<AgentSnapshot>,
    pub approach: Option<ApproachPose>,
    pub hsci: HsciSample,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub config: Preset,
    pub success: bool,
    pub time_to_goal: Option<f64>,
    pub final_distance: f64,
    pub max_sii: f64,
    pub max_sgi: f64,
    pub final_sii: f64,
    pub final_sdi: f64,
    pub no_valid_pose: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub records: Vec<TraceRecord>,
    pub summary: RunSummary,
}

impl SimTrace {
    pub fn write_ndjson(&self, out: &mut impl Write) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut *out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_hsci_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "t,sii,sgi,sdi")?;
        for r in &self.records {
            writeln!(out, "{},{},{},{}", r.hsci.t, r.hsci.sii, r.hsci.sgi, r.hsci.sdi)?;
        }
        Ok(())
    }
}

pub fn write_summary_csv(rows: &[RunSummary], out: &mut impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "config",
        "success",
        "time_to_goal",
        "final_distance",
        "max_sii",
        "max_sgi",
    ])
    .map_err(|e| Error::parse("summary.csv", e))?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.config.label().to_string(),
            r.success.to_string(),
            r.time_to_goal.map(|t| t.to_string()).unwrap_or_default(),
            r.final_distance.to_string(),
            r.max_sii.to_string(),
            r.max_sgi.to_string(),
        ])
        .map_err(|e| Error::parse("summary.csv", e))?;
    }
    w.flush().map_err(|e| Error::io("summary.csv", e))
}

fn target_heading(scene: &SceneState, target: &Target) -> f64 {
    match target {
        Target::Person(id) => scene.person(id).map_or(0.0, |p| p.pose.theta),
        Target::Group(id) => scene.group(id).map_or(0.0, |g| g.orientation),
    }
}

/// Layer stack used every tick, before the person obstacles are filled in.
pub fn base_layers(spec: GridSpec, static_map: Option<&Costmap>, cfg: &RunConfig) -> LayerStack {
    let mut stack = LayerStack::new(spec)
        .with_clean_people(cfg.sim.clearing_radius)
        .with_inflation(cfg.sim.inflation)
        .with_adaptive();
    if let Some(m) = static_map {
        stack = stack.with_static(m.clone());
    }
    stack
}

/// Approach query for `target` in a scene holding baseline parameters. A lone
/// target's first circle follows its (possibly shrunk) frontal extent.
pub fn approach_query(scene: &SceneState, target: Target, robot: Pose2D, preset: Preset, cfg: &RunConfig) -> ApproachQuery {
    let initial_radius = match &target {
        Target::Person(id) => scene.person(id).map(|p| {
            let params = if preset.space_adapt() {
                adapt_individual_target(p.params, &cfg.adaptation)
            } else {
                p.params
            };
            person_initial_radius(&params, &cfg.approach)
        }),
        Target::Group(_) => None,
    };
    ApproachQuery {
        target,
        robot,
        s_r: cfg.adaptation.s_r,
        adaptive: preset.approach_adapt(),
        initial_radius,
    }
}

/// One approach query against a scene held still: the scene is adapted as
/// the preset says, composed onto `spec` and searched.
pub fn approach_once(
    scene: &SceneState,
    target: &Target,
    robot: Pose2D,
    preset: Preset,
    spec: GridSpec,
    cfg: &RunConfig,
) -> Result<ApproachReport> {
    let active = if preset.space_adapt() {
        adapt_scene(scene, Some(target), robot.position(), &cfg.adaptation, &cfg.velocity)?
    } else {
        scene.clone()
    };
    let mut stack = base_layers(spec, None, cfg);
    stack.obstacles = scene.persons.iter().map(|p| p.position()).collect();
    let master = compose(&stack, &active);
    let query = approach_query(scene, target.clone(), robot, preset, cfg);
    Ok(estimate_approach_pose_traced(&master, &active, &query, &cfg.approach))
}

pub fn run_scenario(
    scenario: &Scenario,
    static_map: Option<&Costmap>,
    preset: Preset,
    cfg: &RunConfig,
) -> Result<SimTrace> {
    let dt = scenario.dt.unwrap_or(cfg.sim.dt);
    let steps = (scenario.duration / dt).round() as usize;
    let replan_every = ((cfg.sim.replan_period / dt).round() as usize).max(1);

    let mut scene = scenario.scene.to_scene(&cfg.person, &cfg.group)?;
    for s in &scenario.scripts {
        if let Some(p) = scene.person_mut(&s.person) {
            p.velocity = s.speed * p.pose.heading();
        }
    }
    scene.rederive_groups(&cfg.group)?;
    let mut halted = vec![false; scenario.scripts.len()];

    let spec = match static_map {
        Some(m) => *m.spec(),
        None => scenario.grid.unwrap_or(cfg.grid),
    };
    let res = spec.resolution;
    let mut stack = base_layers(spec, static_map, cfg);

    let mut target = Target::resolve(&scene, &scenario.target);
    let mut last_center = target.as_ref().and_then(|t| t.center(&scene));
    let mut robot = RobotState::at(scenario.robot_start);
    let mut approach: Option<ApproachPose> = None;
    let mut path: Vec<Point2<f64>> = Vec::new();
    let mut records = Vec::with_capacity(steps + 1);
    let mut reached_at = None;

    for step in 0..=steps {
        let t = step as f64 * dt;
        let mut events = Vec::new();
        if step > 0 {
            let before = halted.iter().filter(|h| **h).count();
            step_agents(&scenario.scripts, &mut scene, &mut halted, robot.pose.position(), dt);
            scene.rederive_groups(&cfg.group)?;
            if halted.iter().filter(|h| **h).count() > before {
                events.push(Event::AgentHalted);
            }
        }

        let tracked = last_center.and_then(|c| track_target(&scene, c, cfg.approach.track_threshold));
        match &tracked {
            Some(t) => {
                if target.as_ref() != Some(t) {
                    events.push(Event::Retargeted);
                }
                last_center = t.center(&scene);
                target = Some(t.clone());
            }
            None => events.push(Event::TargetLost),
        }

        let active = match (&target, preset.space_adapt()) {
            (Some(tg), true) => adapt_scene(
                &scene,
                Some(tg),
                robot.pose.position(),
                &cfg.adaptation,
                &cfg.velocity,
            )?,
            _ => scene.clone(),
        };
        stack.obstacles = scene.persons.iter().map(|p| p.position()).collect();
        let master = compose(&stack, &active);

        if step % replan_every == 0 && tracked.is_some() {
            let tg = target.clone().expect("tracked target");
            let query = approach_query(&scene, tg, robot.pose, preset, cfg);
            match estimate_approach_pose(&master, &active, &query, &cfg.approach) {
                Ok(pose) => {
                    events.push(Event::PoseReplanned);
                    approach = Some(pose);
                    match plan_path(&master, robot.pose.position(), pose.position(), cfg.sim.cost_weight) {
                        Ok(p) => path = p,
                        Err(_) => {
                            events.push(Event::PlanFailed);
                            path.clear();
                        }
                    }
                }
                Err(_) => {
                    events.push(Event::NoValidPose);
                    approach = None;
                    path.clear();
                }
            }
        }

        let all_halted = scenario
            .scripts
            .iter()
            .zip(&halted)
            .all(|(s, h)| *h || s.speed == 0.0);
        let at_pose = approach.is_some_and(|a| {
            (a.position() - robot.pose.position()).norm() <= res
                && wrap_angle(a.heading - robot.pose.theta).abs() <= cfg.sim.heading_tolerance
        });

        let hsci = HsciSample {
            t,
            sii: compute_sii(&robot.pose, &scene, &cfg.eval),
            sgi: compute_sgi(&robot.pose, &scene),
            sdi: target.as_ref().map_or(0.0, |tg| compute_sdi(&robot.pose, target_heading(&scene, tg))),
        };
        let done = all_halted && at_pose;
        if done {
            events.push(Event::GoalReached);
            reached_at = Some(t);
        } else if step == steps {
            events.push(Event::Timeout);
        }
        records.push(TraceRecord {
            step,
            t,
            robot: robot.pose,
            v: robot.v,
            w: robot.w,
            robot_cell_cost: master.cost_at(robot.pose.position()).unwrap_or(crate::costmap::UNKNOWN),
            persons: scene
                .persons
                .iter()
                .map(|p| AgentSnapshot {
                    id: p.id.clone(),
                    x: p.pose.x,
                    y: p.pose.y,
                    theta: p.pose.theta,
                    vx: p.velocity.x,
                    vy: p.velocity.y,
                })
                .collect(),
            approach,
            hsci,
            events,
        });
        if done {
            break;
        }

        // keep only waypoints ahead of the robot
        let pos = robot.pose.position();
        while path.len() > 1 && (path[0] - pos).norm() < cfg.sim.lookahead {
            path.remove(0);
        }
        robot = follow_path(
            &robot,
            &path,
            approach.map(|a| a.heading),
            0.8 * res,
            &cfg.sim,
            dt,
        );
    }

    let summary_eval = evaluate_trace(&records, dt, &cfg.eval);
    let final_distance = match (&target, records.last()) {
        (Some(tg), Some(r)) => tg.center(&scene).map_or(f64::NAN, |c| (c - r.robot.position()).norm()),
        _ => f64::NAN,
    };
    let summary = RunSummary {
        scenario: scenario.name.clone(),
        config: preset,
        success: reached_at.is_some(),
        time_to_goal: reached_at,
        final_distance,
        max_sii: summary_eval.max_sii,
        max_sgi: summary_eval.max_sgi,
        final_sii: summary_eval.final_sii,
        final_sdi: summary_eval.final_sdi,
        no_valid_pose: records
            .iter()
            .filter(|r| r.events.contains(&Event::NoValidPose))
            .count(),
    };
    Ok(SimTrace { records, summary })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::scene::PersonDoc;

    fn person(id: &str, x: f64, y: f64, theta: f64) -> PersonDoc {
        PersonDoc {
            id: id.into(),
            x,
            y,
            theta,
            vx: 0.0,
            vy: 0.0,
            amplitude: None,
            sigma_f: None,
            sigma_r: None,
            sigma_sl: None,
            sigma_sr: None,
        }
    }

    #[test]
    fn presets() {
        assert!(!Preset::I.space_adapt() && !Preset::I.approach_adapt());
        assert!(Preset::Iii.space_adapt() && !Preset::Iii.approach_adapt());
        assert_eq!(Preset::parse("IV"), Some(Preset::Iv));
        assert_eq!(Preset::parse("v"), None);
    }

    #[test]
    fn agents_walk_and_halt() {
        let doc = SceneDoc { persons: vec![person("a", 0.0, 0.0, 0.0)], groups: vec![] };
        let cfg = RunConfig::default();
        let mut scene = doc.to_scene(&cfg.person, &cfg.group).unwrap();
        let still = [AgentScript { person: "a".into(), speed: 0.0, stop_distance: 1.0 }];
        let mut halted = [false];
        step_agents(&still, &mut scene, &mut halted, Point2::new(9.0, 0.0), 0.1);
        assert_eq!(scene.persons[0].pose.x, 0.0);

        let walk = [AgentScript { person: "a".into(), speed: 1.0, stop_distance: 1.0 }];
        step_agents(&walk, &mut scene, &mut halted, Point2::new(9.0, 0.0), 0.1);
        assert!((scene.persons[0].pose.x - 0.1).abs() < 1e-15);
        step_agents(&walk, &mut scene, &mut halted, Point2::new(0.5, 0.0), 0.1);
        assert!(halted[0]);
        let x = scene.persons[0].pose.x;
        step_agents(&walk, &mut scene, &mut halted, Point2::new(9.0, 0.0), 0.1);
        assert_eq!(scene.persons[0].pose.x, x);
        assert_eq!(scene.persons[0].speed(), 0.0);
    }

    #[test]
    fn controller_basics() {
        let params = SimParams::default();
        let r = RobotState::at(Pose2D::new(0.0, 0.0, 0.0));
        let at_goal = follow_path(&r, &[Point2::new(0.0, 0.0)], None, 0.04, &params, 0.1);
        assert_eq!((at_goal.v, at_goal.w), (0.0, 0.0));
        let ahead = follow_path(&r, &[Point2::new(2.0, 0.0)], None, 0.04, &params, 0.1);
        assert!(ahead.v > 0.0 && ahead.w == 0.0);
        let left = follow_path(&r, &[Point2::new(0.0, 2.0)], None, 0.04, &params, 0.1);
        assert!(left.w > 0.0 && left.v == 0.0);
        let turn = follow_path(&r, &[Point2::new(0.0, 0.0)], Some(FRAC_PI_2), 0.04, &params, 0.1);
        assert!(turn.w > 0.0);
    }

    #[test]
    fn empty_scene_idles_to_timeout() {
        let scenario = Scenario {
            name: "empty".into(),
            map: None,
            grid: Some(GridSpec::new(-2.0, -2.0, 0.05, 80, 80)),
            scene: SceneDoc::default(),
            scripts: vec![],
            robot_start: Pose2D::new(0.0, 0.0, 0.0),
            target: "nobody".into(),
            configs: vec![Preset::I],
            duration: 1.0,
            dt: None,
        };
        let trace = run_scenario(&scenario, None, Preset::I, &RunConfig::default()).unwrap();
        assert_eq!(trace.records.len(), 11);
        assert!(!trace.summary.success);
        assert!(trace.records.iter().all(|r| r.robot == scenario.robot_start));
        assert!(trace.records.last().unwrap().events.contains(&Event::Timeout));
    }
}
