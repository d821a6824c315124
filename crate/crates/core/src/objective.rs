//! The rotation objective: δ₁, δ₂, penalised single-point fitness, the area
//! min-fitness and null-point detection.
//!
//! Under the far-field model the received power is proportional to
//! `δ₁ δ₂ / r²`, where
//!
//! * `δ₁ = cos²φⁱ (cos²φʳ cos²(θⁱ+θʳ) + sin²(θⁱ+θʳ))`,
//! * `δ₂ = sinc²(π L̄ Δ₁) sinc²(π L̄ Δ₂)`,
//! * `Δ₁ = cos θⁱ sin φⁱ + sin θʳ cos φʳ`, `Δ₂ = sin θʳ sin φʳ − sin θⁱ sin φⁱ`.

use crate::channel::sinc;
use crate::geometry::{feasible, path_angles, PathAngles, Rotation, Scenario, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPair {
    pub delta1: f64,
    pub delta2: f64,
    /// `Δ₁`
    pub proj1: f64,
    /// `Δ₂`
    pub proj2: f64,
}

impl DeltaPair {
    pub fn product(&self) -> f64 {
        self.delta1 * self.delta2
    }
}

pub fn deltas(angles: &PathAngles, l_bar_norm: f64) -> DeltaPair {
    let PathAngles {
        theta_i,
        phi_i,
        theta_r,
        phi_r,
    } = *angles;
    let s = theta_i + theta_r;
    let delta1 = phi_i.cos().powi(2) * (phi_r.cos().powi(2) * s.cos().powi(2) + s.sin().powi(2));
    let proj1 = theta_i.cos() * phi_i.sin() + theta_r.sin() * phi_r.cos();
    let proj2 = theta_r.sin() * phi_r.sin() - theta_i.sin() * phi_i.sin();
    let k = std::f64::consts::PI * l_bar_norm;
    let delta2 = (sinc(k * proj1) * sinc(k * proj2)).powi(2);
    DeltaPair {
        delta1,
        delta2,
        proj1,
        proj2,
    }
}

/// Penalty weight `τ` for violating the front-of-surface constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessParams {
    pub tau: f64,
}

impl Default for FitnessParams {
    fn default() -> Self {
        Self { tau: 10.0 }
    }
}

impl FitnessParams {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::validation("optimizer.tau", "penalty weight must be positive"));
        }
        Ok(Self { tau })
    }
}

/// `L(Ω) = δ₁δ₂ − τ (max{0, −z_B} + max{0, −z_U})`.
pub fn fitness_single(scn: &Scenario, rot: Rotation, user: &Vec3, params: &FitnessParams) -> Result<f64> {
    let angles = path_angles(scn, rot, user)?;
    let d = deltas(&angles, scn.l_bar_norm());
    let slack = feasible(scn, rot, user);
    Ok(d.product() - params.tau * slack.violation())
}

/// Rectangular lattice of user positions covering the target area.
///
/// Points are stored x-major (x outer, y inner). Each axis starts at the
/// lower edge, advances by its step and always ends exactly on the upper edge.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaGrid {
    pub x_step: f64,
    pub y_step: f64,
    pub nx: usize,
    pub ny: usize,
    pub points: Vec<Vec3>,
}

fn axis(center: f64, size: f64, step: f64) -> Vec<f64> {
    if size == 0.0 {
        return vec![center];
    }
    let lo = center - size / 2.0;
    let hi = center + size / 2.0;
    let n = ((size / step) - 1e-9).ceil().max(1.0) as usize;
    let mut v: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    v.push(hi);
    v
}

impl AreaGrid {
    pub fn new(center: &Vec3, size_x: f64, size_y: f64, x_step: f64, y_step: f64) -> Result<Self> {
        for (name, v) in [("grid.x_step", x_step), ("grid.y_step", y_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, "grid step must be positive"));
            }
        }
        if !(size_x >= 0.0 && size_y >= 0.0) {
            return Err(Error::domain("area sizes must be non-negative"));
        }
        let xs = axis(center.x, size_x, x_step);
        let ys = axis(center.y, size_y, y_step);
        let points = xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| Vec3::new(x, y, center.z)))
            .collect();
        Ok(Self {
            x_step,
            y_step,
            nx: xs.len(),
            ny: ys.len(),
            points,
        })
    }

    /// Grid over the scenario's target area.
    pub fn for_scenario(scn: &Scenario, step: f64) -> Result<Self> {
        Self::new(&scn.area_center, scn.area_x, scn.area_y, step, step)
    }

    pub fn single(point: Vec3) -> Self {
        Self {
            x_step: 1.0,
            y_step: 1.0,
            nx: 1,
            ny: 1,
            points: vec![point],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of grid neighbours `(i, j)` sharing an edge of the lattice.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                let i = ix * self.ny + iy;
                if iy + 1 < self.ny {
                    e.push((i, i + 1));
                }
                if ix + 1 < self.nx {
                    e.push((i, i + self.ny));
                }
            }
        }
        e
    }
}

/// A sinc zero of δ₂ lying inside the observed `Δ` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullReport {
    /// 1 for `Δ₁`, 2 for `Δ₂`.
    pub term: u8,
    pub order: u32,
    pub threshold: f64,
    pub interval: (f64, f64),
}

/// Smallest `v ≥ 1` with `±v / L̄ ∈ [lo, hi]`.
pub fn null_in_interval(lo: f64, hi: f64, l_bar_norm: f64) -> Option<(u32, f64)> {
    if !(l_bar_norm > 0.0) || lo > hi {
        return None;
    }
    let first_at_least = |a: f64| (a * l_bar_norm).ceil().max(1.0);
    let pos = {
        let v = first_at_least(lo);
        (v / l_bar_norm <= hi).then_some((v, v / l_bar_norm))
    };
    let neg = {
        let v = first_at_least(-hi);
        (v / l_bar_norm <= -lo).then_some((v, -v / l_bar_norm))
    };
    match (pos, neg) {
        (Some(p), Some(n)) => Some(if n.0 < p.0 { n } else { p }),
        (p, n) => p.or(n),
    }
    .map(|(v, t)| (v as u32, t))
}

#[derive(Debug, Clone, Copy)]
struct Extremes {
    lo1: f64,
    hi1: f64,
    lo2: f64,
    hi2: f64,
}

impl Extremes {
    fn new() -> Self {
        Self {
            lo1: f64::INFINITY,
            hi1: f64::NEG_INFINITY,
            lo2: f64::INFINITY,
            hi2: f64::NEG_INFINITY,
        }
    }

    fn push(&mut self, d: &DeltaPair) {
        self.lo1 = self.lo1.min(d.proj1);
        self.hi1 = self.hi1.max(d.proj1);
        self.lo2 = self.lo2.min(d.proj2);
        self.hi2 = self.hi2.max(d.proj2);
    }

    fn null(&self, l_bar_norm: f64) -> Option<NullReport> {
        let first = null_in_interval(self.lo1, self.hi1, l_bar_norm).map(|(v, t)| NullReport {
            term: 1,
            order: v,
            threshold: t,
            interval: (self.lo1, self.hi1),
        });
        first.or_else(|| {
            null_in_interval(self.lo2, self.hi2, l_bar_norm).map(|(v, t)| NullReport {
                term: 2,
                order: v,
                threshold: t,
                interval: (self.lo2, self.hi2),
            })
        })
    }
}

/// Full pass over the grid collecting `Δ₁`/`Δ₂` extremes, then the null test.
pub fn null_point_scan(scn: &Scenario, rot: Rotation, grid: &AreaGrid, l_bar_norm: f64) -> Result<Option<NullReport>> {
    let mut ext = Extremes::new();
    for p in &grid.points {
        ext.push(&deltas(&path_angles(scn, rot, p)?, l_bar_norm));
    }
    Ok(ext.null(l_bar_norm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaFitness {
    /// `min_p D(Ω; p)`.
    pub value: f64,
    pub worst_point: Vec3,
    /// Smallest `δ₁δ₂` seen among the evaluated points (zero on a null).
    pub min_product: f64,
    pub null: Option<NullReport>,
    pub points_evaluated: usize,
}

/// `min_p δ₁δ₂ / ‖p − p_c‖² − τ (max{0, −z_B} + max{0, −z_U})` over the grid.
///
/// The running `Δ` intervals only widen, so the scan stops at the first point
/// where one of them covers a sinc zero; the area minimum of `δ₁δ₂` is then
/// zero and the value is the (non-positive) penalty alone.
pub fn fitness_area(scn: &Scenario, rot: Rotation, grid: &AreaGrid, params: &FitnessParams) -> Result<AreaFitness> {
    if grid.is_empty() {
        return Err(Error::domain("area grid has no points"));
    }
    let l_bar = scn.l_bar_norm();
    let mut ext = Extremes::new();
    let mut best = (f64::INFINITY, 0usize);
    let mut min_product = f64::INFINITY;
    let mut worst_violation = (0.0f64, 0usize);
    for (i, p) in grid.points.iter().enumerate() {
        let d = deltas(&path_angles(scn, rot, p)?, l_bar);
        ext.push(&d);
        let violation = feasible(scn, rot, p).violation();
        if violation > worst_violation.0 {
            worst_violation = (violation, i);
        }
        if let Some(null) = ext.null(l_bar) {
            return Ok(AreaFitness {
                value: -params.tau * worst_violation.0,
                worst_point: grid.points[if worst_violation.0 > 0.0 { worst_violation.1 } else { i }],
                min_product: 0.0,
                null: Some(null),
                points_evaluated: i + 1,
            });
        }
        let r2 = (p - scn.irs_center).norm_squared();
        let v = d.product() / r2 - params.tau * violation;
        min_product = min_product.min(d.product());
        if v < best.0 {
            best = (v, i);
        }
    }
    Ok(AreaFitness {
        value: best.0,
        worst_point: grid.points[best.1],
        min_product,
        null: None,
        points_evaluated: grid.len(),
    })
}
