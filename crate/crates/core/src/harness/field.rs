//! Per-point field dumps over the area grid.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{received_power_farfield, snr_db};
use crate::geometry::{path_angles, Rotation, Scenario};
use crate::harness::config::scenario_hash;
use crate::objective::{deltas, AreaGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRow {
    pub x: f64,
    pub y: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta_product: f64,
    pub snr_db: f64,
}

/// Sidecar written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub theta_rad: f64,
    pub phi_rad: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub scenario_hash: String,
    pub min_snr_db: f64,
    pub argmin: [f64; 2],
    pub min_delta_product: f64,
    pub points: usize,
}

/// Grid points in storage order.
pub fn field_rows(scn: &Scenario, rot: Rotation, grid: &AreaGrid) -> Result<Vec<FieldRow>> {
    let l_bar = scn.l_bar_norm();
    grid.points
        .par_iter()
        .map(|p| {
            let d = deltas(&path_angles(scn, rot, p)?, l_bar);
            let power = received_power_farfield(scn, rot, p)?;
            Ok(FieldRow {
                x: p.x,
                y: p.y,
                delta1: d.delta1,
                delta2: d.delta2,
                delta_product: d.product(),
                snr_db: snr_db(scn, power),
            })
        })
        .collect()
}

pub fn summarize(scn: &Scenario, rot: Rotation, rows: &[FieldRow]) -> Result<FieldSummary> {
    let worst = rows
        .iter()
        .fold(None::<&FieldRow>, |w, r| match w {
            Some(w) if w.snr_db <= r.snr_db => Some(w),
            _ => Some(r),
        })
        .ok_or_else(|| Error::domain("field has no points"))?;
    let (theta_deg, phi_deg) = rot.to_degrees();
    Ok(FieldSummary {
        theta_rad: rot.theta(),
        phi_rad: rot.phi(),
        theta_deg,
        phi_deg,
        scenario_hash: scenario_hash(scn),
        min_snr_db: worst.snr_db,
        argmin: [worst.x, worst.y],
        min_delta_product: rows.iter().map(|r| r.delta_product).fold(f64::INFINITY, f64::min),
        points: rows.len(),
    })
}

pub fn write_field_csv<W: Write>(rows: &[FieldRow], mut out: W) -> Result<()> {
    writeln!(out, "x,y,delta1,delta2,delta_product,snr_db")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.x, r.y, r.delta1, r.delta2, r.delta_product, r.snr_db
        )?;
    }
    Ok(())
}

/// Write `csv_path` and a JSON sidecar with the same stem.
pub fn emit_field(scn: &Scenario, rot: Rotation, grid: &AreaGrid, csv_path: &Path) -> Result<FieldSummary> {
    let rows = field_rows(scn, rot, grid)?;
    let summary = summarize(scn, rot, &rows)?;
    let file = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    write_field_csv(&rows, file)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::domain(e.to_string()))?;
    std::fs::write(csv_path.with_extension("json"), json)?;
    Ok(summary)
}
