//! One-dimensional parameter sweeps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Scenario;
use crate::harness::config::{scenario_hash, squarest_shape, RunSettings};
use crate::harness::schemes::{run_scheme, Mode, SchemeKind};
use crate::units::dbm_to_watts;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Transmit power, dBm.
    PT,
    /// BS antenna count.
    MAntennas,
    /// IRS element count.
    NElements,
    /// Area extent along y, meters.
    AreaY,
    /// IRS centre height, meters.
    IrsAltitude,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::PT => "p_t",
            SweepVariable::MAntennas => "m_antennas",
            SweepVariable::NElements => "n_elements",
            SweepVariable::AreaY => "area_y",
            SweepVariable::IrsAltitude => "irs_altitude",
        }
    }

    fn is_count(&self) -> bool {
        matches!(self, SweepVariable::MAntennas | SweepVariable::NElements)
    }

    /// Copy of `scn` with this variable set to `value`.
    pub fn apply(&self, scn: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = scn.clone();
        let count = || -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::validation(
                    self.name(),
                    format!("{value} is not a positive integer"),
                ))
            }
        };
        match self {
            SweepVariable::PT => s.p_t = dbm_to_watts(value),
            SweepVariable::MAntennas => {
                let [r, c] = squarest_shape(count()?);
                s.bs.rows = r;
                s.bs.cols = c;
            }
            SweepVariable::NElements => {
                let [r, c] = squarest_shape(count()?);
                s.irs.rows = r;
                s.irs.cols = c;
            }
            SweepVariable::AreaY => s.area_y = value,
            SweepVariable::IrsAltitude => s.irs_center.z = value,
        }
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepVariable::PT,
            SweepVariable::MAntennas,
            SweepVariable::NElements,
            SweepVariable::AreaY,
            SweepVariable::IrsAltitude,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| Error::Usage(format!("unknown sweep variable `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("values", "sweep needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("values", "sweep values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("values", "sweep values must be strictly increasing"));
        }
        if variable.is_count() && values.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
            return Err(Error::validation("values", "counts must be positive integers"));
        }
        Ok(Self { variable, values })
    }

    /// Parse `"20,25,30"`.
    pub fn parse(variable: &str, values: &str) -> Result<Self> {
        let values = values
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::validation("values", format!("`{s}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(variable.parse()?, values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub scheme: SchemeKind,
    pub snr_db: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub irs_y: f64,
    pub delta_product: f64,
    pub feasible: bool,
}

/// Every `(scheme, value)` cell, scheme-major in `schemes` order.
pub fn run_sweep(
    scn: &Scenario,
    settings: &RunSettings,
    spec: &SweepSpec,
    schemes: &[SchemeKind],
    mode: Mode,
) -> Result<Vec<SweepRow>> {
    let cells: Vec<(f64, SchemeKind)> = schemes
        .iter()
        .flat_map(|&k| spec.values.iter().map(move |&v| (v, k)))
        .collect();
    cells
        .par_iter()
        .map(|&(value, scheme)| {
            let s = spec.variable.apply(scn, value)?;
            let r = run_scheme(&s, settings, scheme, mode)?;
            Ok(SweepRow {
                variable: spec.variable,
                value,
                scheme,
                snr_db: r.snr_db,
                theta_deg: r.theta_deg,
                phi_deg: r.phi_deg,
                irs_y: r.irs_center[1],
                delta_product: r.delta_product,
                feasible: r.feasible,
            })
        })
        .collect()
}

/// Sidecar describing a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub schemes: Vec<SchemeKind>,
    pub mode: Mode,
    pub scenario_hash: String,
    pub notes: Vec<String>,
}

pub fn sweep_metadata(scn: &Scenario, spec: &SweepSpec, schemes: &[SchemeKind], mode: Mode) -> SweepMetadata {
    let mut notes = Vec::new();
    match spec.variable {
        SweepVariable::AreaY => notes.push("area width D_y is read as the area extent A_y along y".to_string()),
        SweepVariable::PT => notes.push("values are transmit powers in dBm".to_string()),
        SweepVariable::MAntennas | SweepVariable::NElements => {
            notes.push("counts are laid out as their squarest rows x cols factorisation".to_string())
        }
        SweepVariable::IrsAltitude => {}
    }
    SweepMetadata {
        variable: spec.variable,
        values: spec.values.clone(),
        schemes: schemes.to_vec(),
        mode,
        scenario_hash: scenario_hash(scn),
        notes,
    }
}

/// Long-format CSV, one line per cell.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(
        out,
        "variable,value,scheme,snr_db,theta_deg,phi_deg,irs_y,delta_product,feasible"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{:.16e},{},{:.16e},{}",
            r.variable, r.value, r.scheme, r.snr_db, r.theta_deg, r.phi_deg, r.irs_y, r.delta_product, r.feasible
        )?;
    }
    Ok(())
}
