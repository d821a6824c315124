//! Scenario files.
//!
//! A scenario file is a JSON document; every field is optional and missing
//! fields fall back to the reference deployment. Powers and gains accept
//! either raw SI numbers or strings with units (`"30 dBm"`, `"1.0 W"`,
//! `"-40 dB"`).
//!
//! ```json
//! {
//!   "bs":   { "position": [50, 20, 0], "antennas": 128, "shape": [16, 8] },
//!   "irs":  { "center": [0, 50, 10], "elements": 256, "element_len_norm": 0.25 },
//!   "area": { "center": [30, 80, 0], "size": [10, 10] },
//!   "link": { "beta": "-40 dB", "lambda": 0.1, "p_t": "30 dBm", "noise": "-90 dBm" },
//!   "optimizer": { "seed": 7, "es_step_deg": 0.5, "grid_step": 1.0 }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{ArraySpec, Scenario, Vec3};
use crate::objective::FitnessParams;
use crate::optimizer::PsoParams;
use crate::units::{db_to_linear, dbm_to_watts};
use crate::{Error, Result};

/// A number in SI units or a string with a unit suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    fn split(s: &str) -> Option<(f64, String)> {
        let s = s.trim();
        let idx = s.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(s.len());
        let value = s[..idx].trim().parse::<f64>().ok()?;
        Some((value, s[idx..].trim().to_string()))
    }

    /// Power in watts. Accepts W, mW, dBm, dBW.
    pub fn watts(&self, field: &str) -> Result<f64> {
        match self {
            Quantity::Number(v) => Ok(*v),
            Quantity::Text(s) => {
                let (v, unit) =
                    Self::split(s).ok_or_else(|| Error::validation(field, format!("cannot parse power `{s}`")))?;
                match unit.as_str() {
                    "" | "W" => Ok(v),
                    "mW" => Ok(v * 1e-3),
                    "dBm" => Ok(dbm_to_watts(v)),
                    "dBW" => Ok(dbm_to_watts(v + 30.0)),
                    _ => Err(Error::validation(field, format!("unknown power unit `{unit}`"))),
                }
            }
        }
    }

    /// Dimensionless gain. Accepts plain numbers and dB.
    pub fn gain(&self, field: &str) -> Result<f64> {
        match self {
            Quantity::Number(v) => Ok(*v),
            Quantity::Text(s) => {
                let (v, unit) =
                    Self::split(s).ok_or_else(|| Error::validation(field, format!("cannot parse gain `{s}`")))?;
                match unit.as_str() {
                    "" => Ok(v),
                    "dB" => Ok(db_to_linear(v)),
                    _ => Err(Error::validation(field, format!("unknown gain unit `{unit}`"))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antennas: Option<usize>,
    /// `[rows, cols]`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Element side in meters; takes precedence over `element_len_norm`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element_len: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element_len_norm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_t: Option<Quantity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<Quantity>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swarm_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_ini: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_clamp_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_radius_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_inertia: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_component_rand: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub es_step_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovableSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

/// On-disk scenario document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub bs: BsSection,
    #[serde(default)]
    pub irs: IrsSection,
    #[serde(default)]
    pub area: AreaSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub movable: MovableSection,
}

/// Candidate `y_c` positions for the movable-IRS benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovableRange {
    pub y_min: f64,
    pub y_max: f64,
    pub step: f64,
}

impl Default for MovableRange {
    fn default() -> Self {
        Self {
            y_min: 0.0,
            y_max: 100.0,
            step: 1.0,
        }
    }
}

impl MovableRange {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || self.y_max < self.y_min {
            return Err(Error::validation("movable", "need step > 0 and y_max >= y_min"));
        }
        let n = ((self.y_max - self.y_min) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.y_min + i as f64 * self.step).collect())
    }
}

/// Everything that is not scenario geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub pso: PsoParams,
    pub fitness: FitnessParams,
    /// Exhaustive search step, radians.
    pub es_step: f64,
    /// Area grid step, meters.
    pub grid_step: f64,
    pub movable: MovableRange,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            pso: PsoParams::default(),
            fitness: FitnessParams::default(),
            es_step: 0.5f64.to_radians(),
            grid_step: 1.0,
            movable: MovableRange::default(),
        }
    }
}

/// A loaded scenario with the names of the fields that took defaults.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub settings: RunSettings,
    pub defaulted: Vec<String>,
}

/// Squarest `rows × cols` factorisation with `rows ≥ cols`.
pub fn squarest_shape(n: usize) -> [usize; 2] {
    let mut cols = (n as f64).sqrt().floor() as usize;
    while cols > 1 && !n.is_multiple_of(cols) {
        cols -= 1;
    }
    let cols = cols.max(1);
    [n / cols, cols]
}

fn resolve_shape(
    field: &str,
    count: Option<usize>,
    shape: Option<[usize; 2]>,
    default: [usize; 2],
) -> Result<[usize; 2]> {
    match (count, shape) {
        (Some(n), Some(s)) => {
            if s[0] * s[1] != n {
                return Err(Error::validation(
                    format!("{field}.shape"),
                    format!("{}x{} does not hold {n} elements", s[0], s[1]),
                ));
            }
            Ok(s)
        }
        (Some(0), None) => Err(Error::validation(field, "count must be at least 1")),
        (Some(n), None) => Ok(squarest_shape(n)),
        (None, Some(s)) => Ok(s),
        (None, None) => Ok(default),
    }
}

struct Defaults<'a>(&'a mut Vec<String>);

impl Defaults<'_> {
    fn take<T>(&mut self, name: &str, v: Option<T>, default: T) -> T {
        v.unwrap_or_else(|| {
            self.0.push(name.to_string());
            default
        })
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Resolve defaults and validate.
    pub fn resolve(&self) -> Result<LoadedScenario> {
        let r = Scenario::reference();
        let mut defaulted = Vec::new();
        let mut d = Defaults(&mut defaulted);

        let lambda = d.take("link.lambda", self.link.lambda, r.lambda);
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::validation("link.lambda", "must be positive"));
        }
        let beta = match &self.link.beta {
            Some(q) => q.gain("link.beta")?,
            None => d.take("link.beta", None, r.beta),
        };
        let p_t = match &self.link.p_t {
            Some(q) => q.watts("link.p_t")?,
            None => d.take("link.p_t", None, r.p_t),
        };
        let noise = match &self.link.noise {
            Some(q) => q.watts("link.noise")?,
            None => d.take("link.noise", None, r.noise),
        };

        if self.bs.antennas.is_none() && self.bs.shape.is_none() {
            d.0.push("bs.antennas".into());
        }
        let bs_shape = resolve_shape("bs", self.bs.antennas, self.bs.shape, [r.bs.rows, r.bs.cols])?;
        if self.irs.elements.is_none() && self.irs.shape.is_none() {
            d.0.push("irs.elements".into());
        }
        let irs_shape = resolve_shape("irs", self.irs.elements, self.irs.shape, [r.irs.rows, r.irs.cols])?;
        let bs_spacing = d.take("bs.spacing", self.bs.spacing, 0.5 * lambda);
        let irs_spacing = d.take("irs.spacing", self.irs.spacing, 0.5 * lambda);
        let element_len = match (self.irs.element_len, self.irs.element_len_norm) {
            (Some(m), _) => m,
            (None, Some(norm)) => norm * lambda,
            (None, None) => d.take("irs.element_len_norm", None, 0.25) * lambda,
        };
        let v3 = |a: [f64; 3]| Vec3::new(a[0], a[1], a[2]);
        let bs_center = v3(d.take("bs.position", self.bs.position, [50.0, 20.0, 0.0]));
        let irs_center = v3(d.take("irs.center", self.irs.center, [0.0, 50.0, 10.0]));
        let area_center = v3(d.take("area.center", self.area.center, [30.0, 80.0, 0.0]));
        let size = d.take("area.size", self.area.size, [10.0, 10.0]);

        let scenario = Scenario {
            bs_center,
            irs_center,
            area_center,
            area_x: size[0],
            area_y: size[1],
            irs: ArraySpec {
                rows: irs_shape[0],
                cols: irs_shape[1],
                spacing: irs_spacing,
            },
            bs: ArraySpec {
                rows: bs_shape[0],
                cols: bs_shape[1],
                spacing: bs_spacing,
            },
            element_len,
            beta,
            lambda,
            p_t,
            noise,
        };
        scenario.validate()?;

        let o = &self.optimizer;
        let dp = PsoParams::default();
        let ds = RunSettings::default();
        let pso = PsoParams {
            swarm_size: o.swarm_size.unwrap_or(dp.swarm_size),
            max_iters: o.max_iters.unwrap_or(dp.max_iters),
            c1: o.c1.unwrap_or(dp.c1),
            c2: o.c2.unwrap_or(dp.c2),
            w_ini: o.w_ini.unwrap_or(dp.w_ini),
            w_end: o.w_end.unwrap_or(dp.w_end),
            v_clamp: o.v_clamp_deg.map(f64::to_radians).unwrap_or(dp.v_clamp),
            seed: o.seed.unwrap_or(dp.seed),
            seed_fraction: o.seed_fraction.unwrap_or(dp.seed_fraction),
            seed_radius: o.seed_radius_deg.map(f64::to_radians).unwrap_or(dp.seed_radius),
            swap_inertia: o.swap_inertia.unwrap_or(dp.swap_inertia),
            per_component_rand: o.per_component_rand.unwrap_or(dp.per_component_rand),
        };
        pso.validate()?;
        let fitness = FitnessParams::new(o.tau.unwrap_or(ds.fitness.tau))?;
        let es_step = o.es_step_deg.map(f64::to_radians).unwrap_or(ds.es_step);
        if !(es_step > 0.0) {
            return Err(Error::validation("optimizer.es_step_deg", "must be positive"));
        }
        let grid_step = o.grid_step.unwrap_or(ds.grid_step);
        if !(grid_step > 0.0) {
            return Err(Error::validation("optimizer.grid_step", "must be positive"));
        }
        let m = &self.movable;
        let movable = MovableRange {
            y_min: m.y_min.unwrap_or(ds.movable.y_min),
            y_max: m.y_max.unwrap_or(ds.movable.y_max),
            step: m.step.unwrap_or(ds.movable.step),
        };
        movable.values()?;

        Ok(LoadedScenario {
            scenario,
            settings: RunSettings {
                pso,
                fitness,
                es_step,
                grid_step,
                movable,
            },
            defaulted,
        })
    }

    /// Fully explicit document in SI units. Loading it reproduces the same
    /// scenario and settings.
    pub fn canonical(scn: &Scenario, settings: &RunSettings) -> Self {
        let a = |v: &Vec3| [v.x, v.y, v.z];
        let p = &settings.pso;
        ScenarioFile {
            bs: BsSection {
                position: Some(a(&scn.bs_center)),
                antennas: Some(scn.bs.len()),
                shape: Some([scn.bs.rows, scn.bs.cols]),
                spacing: Some(scn.bs.spacing),
            },
            irs: IrsSection {
                center: Some(a(&scn.irs_center)),
                elements: Some(scn.irs.len()),
                shape: Some([scn.irs.rows, scn.irs.cols]),
                spacing: Some(scn.irs.spacing),
                element_len: Some(scn.element_len),
                element_len_norm: None,
            },
            area: AreaSection {
                center: Some(a(&scn.area_center)),
                size: Some([scn.area_x, scn.area_y]),
            },
            link: LinkSection {
                beta: Some(Quantity::Number(scn.beta)),
                lambda: Some(scn.lambda),
                p_t: Some(Quantity::Number(scn.p_t)),
                noise: Some(Quantity::Number(scn.noise)),
            },
            optimizer: OptimizerSection {
                tau: Some(settings.fitness.tau),
                swarm_size: Some(p.swarm_size),
                max_iters: Some(p.max_iters),
                c1: Some(p.c1),
                c2: Some(p.c2),
                w_ini: Some(p.w_ini),
                w_end: Some(p.w_end),
                v_clamp_deg: Some(p.v_clamp.to_degrees()),
                seed: Some(p.seed),
                seed_fraction: Some(p.seed_fraction),
                seed_radius_deg: Some(p.seed_radius.to_degrees()),
                swap_inertia: Some(p.swap_inertia),
                per_component_rand: Some(p.per_component_rand),
                es_step_deg: Some(settings.es_step.to_degrees()),
                grid_step: Some(settings.grid_step),
            },
            movable: MovableSection {
                y_min: Some(settings.movable.y_min),
                y_max: Some(settings.movable.y_max),
                step: Some(settings.movable.step),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario documents always serialise")
    }
}

/// Read and resolve a scenario file.
pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let text = std::fs::read_to_string(path)?;
    ScenarioFile::parse(&text)?.resolve()
}

/// SHA-256 of the canonical geometry document, hex encoded.
pub fn scenario_hash(scn: &Scenario) -> String {
    let doc = ScenarioFile::canonical(scn, &RunSettings::default());
    let doc = ScenarioFile {
        optimizer: OptimizerSection::default(),
        movable: MovableSection::default(),
        ..doc
    };
    let digest = Sha256::digest(doc.to_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
