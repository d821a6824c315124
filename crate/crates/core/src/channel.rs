//! LoS channels, the angle-dependent reflection coefficient, optimal
//! beamforming and received power.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::geometry::{
    orientation_frame, path_angles, path_angles_between, PathAngles, Rotation, Scenario, Vec3, BS_COL_DIR, BS_ROW_DIR,
};
use crate::{Error, Result};

/// BS to IRS channel `G` (N × M) with the distances it was built from.
#[derive(Debug, Clone)]
pub struct BsIrsChannel {
    pub entries: DMatrix<Complex64>,
    pub distances: DMatrix<f64>,
}

/// IRS to user channel `f^H` (length N).
#[derive(Debug, Clone)]
pub struct IrsUserChannel {
    pub entries: DVector<Complex64>,
    pub distances: DVector<f64>,
}

/// `√β / d · exp(-j 2π d / λ)`.
fn los_gain(beta: f64, lambda: f64, d: f64) -> Complex64 {
    Complex64::from_polar(beta.sqrt() / d, -TAU * d / lambda)
}

pub fn exact_channels(scn: &Scenario, rot: Rotation, user: &Vec3) -> Result<(BsIrsChannel, IrsUserChannel)> {
    let elems = scn.irs_elements(rot);
    let ants = scn.bs_antennas();
    let t = DMatrix::from_fn(elems.len(), ants.len(), |n, m| (ants[m] - elems[n]).norm());
    let r = DVector::from_iterator(elems.len(), elems.iter().map(|p| (user - p).norm()));
    if t.iter().chain(r.iter()).any(|&d| d == 0.0) {
        return Err(Error::domain("coincident antenna, element or user positions"));
    }
    let g = t.map(|d| los_gain(scn.beta, scn.lambda, d));
    let f = r.map(|d| los_gain(scn.beta, scn.lambda, d));
    Ok((
        BsIrsChannel {
            entries: g,
            distances: t,
        },
        IrsUserChannel {
            entries: f,
            distances: r,
        },
    ))
}

/// Linearised path-length offsets of the rank-one BS–IRS model.
///
/// `t_{n,m} ≈ t_11 + bs[m] + irs[n]`, obtained by projecting the index
/// offsets of antenna `m` and element `n` onto the direction from the first
/// element to the first antenna.
#[derive(Debug, Clone)]
pub struct PathOffsets {
    pub t11: f64,
    /// `ḡ_m` per BS antenna, meters.
    pub bs: Vec<f64>,
    /// `g̃_n` per IRS element, meters.
    pub irs: Vec<f64>,
}

fn angle_cos(d: &Vec3, dir: &Vec3) -> f64 {
    // Spelled as cos(arccos(·)) so the clamp absorbs ulp overshoot.
    (d.dot(dir) / (d.norm() * dir.norm())).clamp(-1.0, 1.0).acos().cos()
}

pub fn path_offsets(scn: &Scenario, rot: Rotation) -> PathOffsets {
    let f = orientation_frame(rot);
    let d11 = scn.bs_first_antenna() - scn.irs_first_element(rot);
    let t11 = d11.norm();
    let cos_bc = angle_cos(&d11, &BS_COL_DIR);
    let cos_br = angle_cos(&d11, &BS_ROW_DIR);
    // Element column indices advance along m_r and row indices along m_c.
    let cos_r = angle_cos(&d11, &f.m_r);
    let cos_c = angle_cos(&d11, &f.m_c);
    let (lt, l) = (scn.bs.spacing, scn.irs.spacing);
    let bs = (1..=scn.bs.len())
        .map(|m| {
            let (row, col) = scn.bs.row_col(m);
            col as f64 * lt * cos_bc + row as f64 * lt * cos_br
        })
        .collect();
    let irs = (1..=scn.irs.len())
        .map(|n| {
            let (row, col) = scn.irs.row_col(n);
            -(col as f64) * l * cos_r - row as f64 * l * cos_c
        })
        .collect();
    PathOffsets { t11, bs, irs }
}

/// Rank-one approximation of `G` and whether `t_11 ≥ √N l² / λ` holds.
#[derive(Debug, Clone)]
pub struct RankOneChannel {
    pub channel: BsIrsChannel,
    pub valid: bool,
    pub offsets: PathOffsets,
}

pub fn approx_bs_irs_channel(scn: &Scenario, rot: Rotation) -> RankOneChannel {
    let offsets = path_offsets(scn, rot);
    let elems = scn.irs_elements(rot);
    let ants = scn.bs_antennas();
    let t = DMatrix::from_fn(elems.len(), ants.len(), |n, m| (ants[m] - elems[n]).norm());
    let k = TAU / scn.lambda;
    let g = DMatrix::from_fn(elems.len(), ants.len(), |n, m| {
        let phase = -k * (offsets.t11 + offsets.bs[m] + offsets.irs[n]);
        Complex64::from_polar(scn.beta.sqrt() / t[(n, m)], phase)
    });
    let bound = (scn.n_elements() as f64).sqrt() * scn.irs.spacing.powi(2) / scn.lambda;
    RankOneChannel {
        channel: BsIrsChannel {
            entries: g,
            distances: t,
        },
        valid: offsets.t11 >= bound,
        offsets,
    }
}

/// Which trigonometric arguments to use for `X` and `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReflectionModel {
    /// Arguments from the field-integral derivation; consistent with the
    /// δ₁/δ₂ objective.
    #[default]
    Derived,
    /// The alternative printed reading
    /// `X ∝ sin θⁱ cos φⁱ + cos θʳ sin φʳ`, `Z² = cos²φʳ sin²(φⁱ+θʳ) + cos²(φⁱ+θʳ)`.
    /// Kept only for A/B comparisons.
    AsPrinted,
}

/// Reception factor `α`, reflection factor `γ` and their ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionFactors {
    pub alpha: f64,
    pub gamma: f64,
    pub x_arg: f64,
    pub y_arg: f64,
    pub z_term: f64,
    /// `l̄ / λ`.
    pub l_bar_norm: f64,
    /// `√(4π l̄⁴ / λ²)`.
    pub aperture: f64,
}

impl ReflectionFactors {
    /// `|η| = √(4π l̄⁴/λ²) · α · γ` (signed, before the phase shift).
    pub fn coefficient(&self) -> f64 {
        self.aperture * self.alpha * self.gamma
    }
}

/// `sin(s)/s` with `sinc(0) = 1`.
pub fn sinc(s: f64) -> f64 {
    if s.abs() < 1e-8 {
        1.0 - s * s / 6.0
    } else {
        s.sin() / s
    }
}

pub fn reflection_factors(angles: &PathAngles, element_len: f64, lambda: f64) -> ReflectionFactors {
    reflection_factors_with(angles, element_len, lambda, ReflectionModel::Derived)
}

pub fn reflection_factors_with(
    angles: &PathAngles,
    element_len: f64,
    lambda: f64,
    model: ReflectionModel,
) -> ReflectionFactors {
    let PathAngles {
        theta_i,
        phi_i,
        theta_r,
        phi_r,
    } = *angles;
    let scale = PI * element_len / lambda;
    let (x_arg, z_term) = match model {
        ReflectionModel::Derived => {
            let s = theta_i + theta_r;
            (
                scale * (theta_i.cos() * phi_i.sin() + theta_r.sin() * phi_r.cos()),
                (phi_r.cos().powi(2) * s.cos().powi(2) + s.sin().powi(2)).sqrt(),
            )
        }
        ReflectionModel::AsPrinted => {
            let s = phi_i + theta_r;
            (
                scale * (theta_i.sin() * phi_i.cos() + theta_r.cos() * phi_r.sin()),
                (phi_r.cos().powi(2) * s.sin().powi(2) + s.cos().powi(2)).sqrt(),
            )
        }
    };
    let y_arg = scale * (theta_r.sin() * phi_r.sin() - theta_i.sin() * phi_i.sin());
    ReflectionFactors {
        alpha: phi_i.cos(),
        gamma: z_term * sinc(x_arg) * sinc(y_arg),
        x_arg,
        y_arg,
        z_term,
        l_bar_norm: element_len / lambda,
        aperture: (4.0 * PI).sqrt() * element_len * element_len / lambda,
    }
}

/// BS weights `w` and IRS phase shifts `ψ`.
#[derive(Debug, Clone)]
pub struct BeamformingConfig {
    pub weights: Vec<Complex64>,
    pub phases: Vec<f64>,
}

impl BeamformingConfig {
    pub fn transmit_power(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }
}

/// Closed-form transmit weights and IRS phases for a user at `user`.
pub fn optimal_beamforming(scn: &Scenario, rot: Rotation, user: &Vec3) -> BeamformingConfig {
    let offsets = path_offsets(scn, rot);
    let k = TAU / scn.lambda;
    let amp = (scn.p_t / scn.m_antennas() as f64).sqrt();
    let weights = offsets.bs.iter().map(|g| Complex64::from_polar(amp, k * g)).collect();
    let phases = scn
        .irs_elements(rot)
        .iter()
        .zip(&offsets.irs)
        .map(|(p, g)| wrap_phase(k * (g + (user - p).norm())))
        .collect();
    BeamformingConfig { weights, phases }
}

/// Reduce to `[0, 2π)`.
pub(crate) fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Which BS–IRS channel a received-power evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    Exact,
    RankOne,
}

/// `|f^H Φ G w|²` with per-element reflection factors evaluated from each
/// element's own incident and reflected angles.
pub fn received_power(
    scn: &Scenario,
    rot: Rotation,
    user: &Vec3,
    cfg: &BeamformingConfig,
    model: ChannelModel,
) -> Result<f64> {
    let (g_exact, f) = exact_channels(scn, rot, user)?;
    let g = match model {
        ChannelModel::Exact => g_exact,
        ChannelModel::RankOne => approx_bs_irs_channel(scn, rot).channel,
    };
    if cfg.weights.len() != scn.m_antennas() || cfg.phases.len() != scn.n_elements() {
        return Err(Error::domain("beamforming config does not match the array sizes"));
    }
    let elems = scn.irs_elements(rot);
    let w = DVector::from_column_slice(&cfg.weights);
    let gw = &g.entries * w;
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, p) in elems.iter().enumerate() {
        let angles = path_angles_between(&scn.bs_center, p, user, rot)?;
        let rf = reflection_factors(&angles, scn.element_len, scn.lambda);
        let eta = Complex64::from_polar(rf.coefficient(), cfg.phases[n]);
        acc += f.entries[n] * eta * gw[n];
    }
    Ok(acc.norm_sqr())
}

pub fn received_power_exact(scn: &Scenario, rot: Rotation, user: &Vec3, cfg: &BeamformingConfig) -> Result<f64> {
    received_power(scn, rot, user, cfg, ChannelModel::Exact)
}

/// Far-field received power with every element sharing the centre's
/// distances and angles:
/// `P_r = 4π l̄⁴ β² P_t M N² α² γ² / (λ² t² r²)`.
pub fn received_power_farfield(scn: &Scenario, rot: Rotation, user: &Vec3) -> Result<f64> {
    let angles = path_angles(scn, rot, user)?;
    let rf = reflection_factors(&angles, scn.element_len, scn.lambda);
    Ok(farfield_power(scn, &rf, scn.bs_distance(), scn.user_distance(user)))
}

pub(crate) fn farfield_power(scn: &Scenario, rf: &ReflectionFactors, t: f64, r: f64) -> f64 {
    let n = scn.n_elements() as f64;
    let m = scn.m_antennas() as f64;
    let ag = rf.alpha * rf.gamma;
    4.0 * PI * scn.element_len.powi(4) * scn.beta.powi(2) * scn.p_t * m * n * n * ag * ag
        / (scn.lambda.powi(2) * t * t * r * r)
}

/// Received SNR `ς = P_r / σ₀²` in dB.
pub fn snr_db(scn: &Scenario, power: f64) -> f64 {
    crate::units::linear_to_db(power / scn.noise)
}
