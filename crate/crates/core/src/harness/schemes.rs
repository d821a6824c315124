//! Rotation schemes and their reports.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::{received_power_farfield, snr_db};
use crate::geometry::path_angles;
use crate::geometry::{Rotation, Scenario, Vec3};
use crate::harness::config::{scenario_hash, RunSettings, ScenarioFile};
use crate::objective::{deltas, AreaGrid};
use crate::optimizer::{
    closed_form_rotation, exhaustive_search, placement_search, pso_target, Axis, OptimizationReport, SearchSpace,
    Target,
};
use crate::{Error, Result};

/// Pinned angle of the single-axis benchmarks, degrees.
pub const FIXED_ANGLE_DEG: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Proposed,
    FixedPhi,
    FixedTheta,
    FixedRotation,
    MovableIrs,
    ClosedForm,
    Exhaustive,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 7] = [
        SchemeKind::Proposed,
        SchemeKind::FixedPhi,
        SchemeKind::FixedTheta,
        SchemeKind::FixedRotation,
        SchemeKind::MovableIrs,
        SchemeKind::ClosedForm,
        SchemeKind::Exhaustive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Proposed => "proposed",
            SchemeKind::FixedPhi => "fixed_phi",
            SchemeKind::FixedTheta => "fixed_theta",
            SchemeKind::FixedRotation => "fixed_rotation",
            SchemeKind::MovableIrs => "movable_irs",
            SchemeKind::ClosedForm => "closed_form",
            SchemeKind::Exhaustive => "exhaustive",
        }
    }

    /// Parse a comma-separated list; `all` expands to every scheme.
    pub fn parse_list(s: &str) -> Result<Vec<SchemeKind>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(SchemeKind::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Usage("no scheme given".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The user sits at the area centre.
    Point,
    /// Worst case over the area grid.
    Area,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" | "single" => Ok(Mode::Point),
            "area" => Ok(Mode::Area),
            _ => Err(Error::Usage(format!("unknown mode `{s}`"))),
        }
    }
}

impl Mode {
    pub fn target(&self, scn: &Scenario, settings: &RunSettings) -> Result<Target> {
        Ok(match self {
            Mode::Point => Target::Point(scn.area_center),
            Mode::Area => Target::Area(AreaGrid::for_scenario(scn, settings.grid_step)?),
        })
    }
}

/// Link quality of a rotation over a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Far-field received power at the worst point, watts.
    pub power: f64,
    pub snr_db: f64,
    /// `δ₁δ₂` at the worst point.
    pub delta_product: f64,
    pub worst_point: Vec3,
}

/// Far-field SNR at the user, or the minimum over the grid.
pub fn evaluate(scn: &Scenario, rot: Rotation, target: &Target) -> Result<Evaluation> {
    let points: &[Vec3] = match target {
        Target::Point(p) => std::slice::from_ref(p),
        Target::Area(g) => &g.points,
    };
    let l_bar = scn.l_bar_norm();
    let mut worst: Option<Evaluation> = None;
    for p in points {
        let power = received_power_farfield(scn, rot, p)?;
        if worst.is_none_or(|w| power < w.power) {
            worst = Some(Evaluation {
                power,
                snr_db: snr_db(scn, power),
                delta_product: deltas(&path_angles(scn, rot, p)?, l_bar).product(),
                worst_point: *p,
            });
        }
    }
    worst.ok_or_else(|| Error::domain("target has no points"))
}

/// One scheme's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: SchemeKind,
    pub mode: Mode,
    pub theta_rad: f64,
    pub phi_rad: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    /// IRS centre used for the evaluation (moved by `movable_irs`).
    pub irs_center: [f64; 3],
    pub snr_db: f64,
    pub power_w: f64,
    pub delta_product: f64,
    pub worst_point: [f64; 3],
    /// Objective value reached by the search, if any.
    pub fitness: Option<f64>,
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub feasible: bool,
    pub wall_clock_s: f64,
}

impl SchemeResult {
    pub fn rotation(&self) -> Rotation {
        Rotation::projected(self.theta_rad, self.phi_rad)
    }
}

fn pinned(kind: SchemeKind) -> SearchSpace {
    let fixed = Axis::Fixed(FIXED_ANGLE_DEG.to_radians());
    match kind {
        SchemeKind::FixedPhi => SearchSpace {
            theta: Axis::Free,
            phi: fixed,
        },
        SchemeKind::FixedTheta => SearchSpace {
            theta: fixed,
            phi: Axis::Free,
        },
        _ => SearchSpace::FULL,
    }
}

/// Run one scheme against `target`.
pub fn run_scheme_on(
    scn: &Scenario,
    settings: &RunSettings,
    kind: SchemeKind,
    target: &Target,
) -> Result<SchemeResult> {
    let start = Instant::now();
    let fp = &settings.fitness;
    let mut used = scn.clone();
    let search: Option<OptimizationReport> = match kind {
        SchemeKind::Proposed | SchemeKind::FixedPhi | SchemeKind::FixedTheta => {
            Some(pso_target(scn, target, &pinned(kind), &settings.pso, fp)?)
        }
        SchemeKind::Exhaustive => Some(exhaustive_search(scn, target, settings.es_step, fp)?),
        _ => None,
    };
    let (rot, fitness, trace, evaluations) = match (&search, kind) {
        (Some(r), _) => (r.best_rotation, Some(r.best_fitness), r.trace.clone(), r.evaluations),
        (None, SchemeKind::FixedRotation) => (Rotation::ZERO, None, Vec::new(), 0),
        (None, SchemeKind::ClosedForm) => {
            let Target::Point(p) = target else {
                return Err(Error::Usage("closed_form applies to a single user only".into()));
            };
            (closed_form_rotation(scn, p)?.rotation, None, Vec::new(), 0)
        }
        (None, SchemeKind::MovableIrs) => {
            let candidates = settings.movable.values()?;
            let place = placement_search(&candidates, |y| {
                let mut s = scn.clone();
                s.irs_center.y = y;
                Ok(evaluate(&s, Rotation::ZERO, target)?.power)
            })?;
            used.irs_center.y = place.best_value;
            (Rotation::ZERO, Some(place.best_fitness), place.trace, candidates.len())
        }
        (None, _) => unreachable!("search schemes always produce a report"),
    };
    let eval = evaluate(&used, rot, target)?;
    let feasible = target.is_feasible(&used, rot);
    let (theta_deg, phi_deg) = rot.to_degrees();
    let v = |p: &Vec3| [p.x, p.y, p.z];
    Ok(SchemeResult {
        scheme: kind,
        mode: match target {
            Target::Point(_) => Mode::Point,
            Target::Area(_) => Mode::Area,
        },
        theta_rad: rot.theta(),
        phi_rad: rot.phi(),
        theta_deg,
        phi_deg,
        irs_center: v(&used.irs_center),
        snr_db: eval.snr_db,
        power_w: eval.power,
        delta_product: eval.delta_product,
        worst_point: v(&eval.worst_point),
        fitness,
        trace,
        evaluations,
        feasible,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

pub fn run_scheme(scn: &Scenario, settings: &RunSettings, kind: SchemeKind, mode: Mode) -> Result<SchemeResult> {
    run_scheme_on(scn, settings, kind, &mode.target(scn, settings)?)
}

/// Results of a run together with the resolved configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub scenario_hash: String,
    pub config: ScenarioFile,
    pub defaulted: Vec<String>,
    pub results: Vec<SchemeResult>,
}

pub fn run(
    scn: &Scenario,
    settings: &RunSettings,
    schemes: &[SchemeKind],
    mode: Mode,
    defaulted: Vec<String>,
) -> Result<RunReport> {
    let target = mode.target(scn, settings)?;
    let results = schemes
        .iter()
        .map(|&k| run_scheme_on(scn, settings, k, &target))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        mode,
        scenario_hash: scenario_hash(scn),
        config: ScenarioFile::canonical(scn, settings),
        defaulted,
        results,
    })
}
