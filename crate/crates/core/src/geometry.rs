//! Coordinate frames, element placement, path angles and feasibility for a
//! rotated IRS.
//!
//! Global frame: the BS and the target area lie on the `z = 0` plane, the IRS
//! hangs at `irs_center`. A rotation `(theta, phi)` turns the IRS normal
//! `k = (cos θ cos φ, -sin θ cos φ, sin φ)`; the local frame attached to the
//! surface has axes `e_x = -m_c`, `e_y = m_r`, `e_z = k`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Relative size of the in-plane projection below which an azimuth is
/// reported as zero (the direction is along the surface normal).
const AZIMUTH_DEGENERATE_REL: f64 = 1e-10;

/// IRS rotation `(theta, phi)` in radians, always inside the feasible box
/// `[-π/2, π/2]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    theta: f64,
    phi: f64,
}

impl Rotation {
    pub const ZERO: Rotation = Rotation { theta: 0.0, phi: 0.0 };

    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::domain("rotation angles must be finite"));
        }
        if theta.abs() > FRAC_PI_2 || phi.abs() > FRAC_PI_2 {
            return Err(Error::domain(format!(
                "rotation ({theta}, {phi}) rad lies outside [-pi/2, pi/2]^2"
            )));
        }
        Ok(Self { theta, phi })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// Element-wise projection onto the feasible box. NaN maps to zero.
    pub fn projected(theta: f64, phi: f64) -> Self {
        Self {
            theta: clamp_angle(theta),
            phi: clamp_angle(phi),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn to_degrees(&self) -> (f64, f64) {
        (self.theta.to_degrees(), self.phi.to_degrees())
    }
}

pub(crate) fn clamp_angle(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-FRAC_PI_2, FRAC_PI_2)
    }
}

/// Surface normal, element base directions and the local axes for one rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationFrame {
    pub k: Vec3,
    pub m_r: Vec3,
    pub m_c: Vec3,
    pub e_x: Vec3,
    pub e_y: Vec3,
    pub e_z: Vec3,
    /// Columns are `(e_x, e_y, e_z)`; `q.transpose()` maps global offsets
    /// into the local frame.
    pub q: Matrix3<f64>,
}

pub fn orientation_frame(rot: Rotation) -> OrientationFrame {
    let (st, ct) = rot.theta.sin_cos();
    let (sp, cp) = rot.phi.sin_cos();
    let k = Vec3::new(ct * cp, -st * cp, sp);
    let m_c = Vec3::new(-ct * sp, st * sp, cp);
    let m_r = Vec3::new(st, ct, 0.0);
    let e_x = Vec3::new(ct * sp, -st * sp, -cp);
    let e_y = Vec3::new(st, ct, 0.0);
    let e_z = Vec3::new(ct * cp, -st * cp, sp);
    let q = Matrix3::from_columns(&[e_x, e_y, e_z]);
    OrientationFrame {
        k,
        m_r,
        m_c,
        e_x,
        e_y,
        e_z,
        q,
    }
}

/// Coordinates of `p` in the IRS local frame centred at `center`.
pub fn local_coordinates(p: &Vec3, center: &Vec3, rot: Rotation) -> Vec3 {
    orientation_frame(rot).q.transpose() * (p - center)
}

/// Rectangular array layout: `rows × cols` elements on a square pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArraySpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
}

impl ArraySpec {
    pub fn new(rows: usize, cols: usize, spacing: f64) -> Result<Self> {
        let spec = Self { rows, cols, spacing };
        spec.validate("array")?;
        Ok(spec)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::validation(
                format!("{name}.shape"),
                "row and column counts must be at least 1",
            ));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::validation(format!("{name}.spacing"), "spacing must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(row, column)` of the 1-based element index `n`.
    pub fn row_col(&self, n: usize) -> (usize, usize) {
        debug_assert!(n >= 1);
        let row = (n - 1) / self.cols;
        let col = n - self.cols * row - 1;
        (row, col)
    }

    /// Element positions in index order. Column indices advance along
    /// `col_dir`, row indices along `row_dir`.
    pub fn positions(&self, first: &Vec3, col_dir: &Vec3, row_dir: &Vec3) -> Vec<Vec3> {
        (1..=self.len())
            .map(|n| {
                let (row, col) = self.row_col(n);
                first + col_dir * (col as f64 * self.spacing) + row_dir * (row as f64 * self.spacing)
            })
            .collect()
    }

    /// Offset from the first element to the geometric centre.
    pub fn center_offset(&self, col_dir: &Vec3, row_dir: &Vec3) -> Vec3 {
        col_dir * ((self.cols as f64 - 1.0) / 2.0 * self.spacing)
            + row_dir * ((self.rows as f64 - 1.0) / 2.0 * self.spacing)
    }
}

/// BS antenna base directions: column index along `(-1, 0, 0)`, row index
/// along `(0, 1, 0)`.
pub const BS_COL_DIR: Vec3 = Vec3::new(-1.0, 0.0, 0.0);
pub const BS_ROW_DIR: Vec3 = Vec3::new(0.0, 1.0, 0.0);

/// IRS element positions for the given first element and rotation.
pub fn element_positions(spec: &ArraySpec, first: &Vec3, rot: Rotation) -> Vec<Vec3> {
    let f = orientation_frame(rot);
    spec.positions(first, &f.m_r, &f.m_c)
}

/// BS antenna positions for the given first antenna.
pub fn antenna_positions(spec: &ArraySpec, first: &Vec3) -> Vec<Vec3> {
    spec.positions(first, &BS_COL_DIR, &BS_ROW_DIR)
}

/// Fixed geometry and link budget constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub bs_center: Vec3,
    pub irs_center: Vec3,
    pub area_center: Vec3,
    pub area_x: f64,
    pub area_y: f64,
    pub irs: ArraySpec,
    pub bs: ArraySpec,
    /// Side of the square IRS element, meters.
    pub element_len: f64,
    /// Channel power gain at 1 m.
    pub beta: f64,
    pub lambda: f64,
    /// Transmit power, watts.
    pub p_t: f64,
    /// Noise power, watts.
    pub noise: f64,
}

impl Scenario {
    /// The reference deployment: BS at (50, 20, 0), IRS at (0, 50, 10),
    /// area centred at (30, 80, 0), 16×8 BS antennas, 16×16 elements,
    /// `l̄ = 0.25 λ`, half-wavelength pitches, β = −40 dB, 30 dBm, −90 dBm.
    pub fn reference() -> Self {
        let lambda = 0.1;
        Self {
            bs_center: Vec3::new(50.0, 20.0, 0.0),
            irs_center: Vec3::new(0.0, 50.0, 10.0),
            area_center: Vec3::new(30.0, 80.0, 0.0),
            area_x: 10.0,
            area_y: 10.0,
            irs: ArraySpec {
                rows: 16,
                cols: 16,
                spacing: 0.5 * lambda,
            },
            bs: ArraySpec {
                rows: 16,
                cols: 8,
                spacing: 0.5 * lambda,
            },
            element_len: 0.25 * lambda,
            beta: 1e-4,
            lambda,
            p_t: 1.0,
            noise: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.irs.validate("irs")?;
        self.bs.validate("bs")?;
        let positive = [
            ("link.beta", self.beta),
            ("link.lambda", self.lambda),
            ("link.p_t", self.p_t),
            ("link.noise", self.noise),
            ("irs.element_len", self.element_len),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(field, format!("must be positive, got {v}")));
            }
        }
        if self.element_len > self.irs.spacing {
            return Err(Error::validation(
                "irs.element_len",
                format!(
                    "element length {} exceeds element spacing {}",
                    self.element_len, self.irs.spacing
                ),
            ));
        }
        for (field, v) in [("area.size[0]", self.area_x), ("area.size[1]", self.area_y)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::validation(field, "must be non-negative"));
            }
        }
        for (field, p) in [
            ("bs.position", &self.bs_center),
            ("irs.center", &self.irs_center),
            ("area.center", &self.area_center),
        ] {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::validation(field, "coordinates must be finite"));
            }
        }
        if self.bs_center.z != 0.0 {
            return Err(Error::validation("bs.position", "BS must lie on the z = 0 plane"));
        }
        if self.area_center.z != 0.0 {
            return Err(Error::validation(
                "area.center",
                "target area must lie on the z = 0 plane",
            ));
        }
        Ok(())
    }

    /// Wavelength-normalised element length `l̄ / λ`.
    pub fn l_bar_norm(&self) -> f64 {
        self.element_len / self.lambda
    }

    pub fn n_elements(&self) -> usize {
        self.irs.len()
    }

    pub fn m_antennas(&self) -> usize {
        self.bs.len()
    }

    pub fn bs_first_antenna(&self) -> Vec3 {
        self.bs_center - self.bs.center_offset(&BS_COL_DIR, &BS_ROW_DIR)
    }

    /// First IRS element for a rotation; the centre stays fixed while the
    /// surface turns.
    pub fn irs_first_element(&self, rot: Rotation) -> Vec3 {
        let f = orientation_frame(rot);
        self.irs_center - self.irs.center_offset(&f.m_r, &f.m_c)
    }

    pub fn irs_elements(&self, rot: Rotation) -> Vec<Vec3> {
        element_positions(&self.irs, &self.irs_first_element(rot), rot)
    }

    pub fn bs_antennas(&self) -> Vec<Vec3> {
        antenna_positions(&self.bs, &self.bs_first_antenna())
    }

    /// BS-to-IRS centre distance `t`.
    pub fn bs_distance(&self) -> f64 {
        (self.bs_center - self.irs_center).norm()
    }

    /// IRS centre to user distance `r`.
    pub fn user_distance(&self, user: &Vec3) -> f64 {
        (user - self.irs_center).norm()
    }
}

/// Incident and reflected azimuth/elevation angles at an IRS point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAngles {
    pub theta_i: f64,
    pub phi_i: f64,
    pub theta_r: f64,
    pub phi_r: f64,
}

/// Local-frame components of a global offset `d` written out in terms of the
/// rotation angles.
fn local_components(d: &Vec3, rot: Rotation) -> (f64, f64, f64) {
    let (st, ct) = rot.theta.sin_cos();
    let (sp, cp) = rot.phi.sin_cos();
    let x = d.x * ct * sp - d.y * st * sp - d.z * cp;
    let y = d.x * st + d.y * ct;
    let z = d.x * ct * cp - d.y * st * cp + d.z * sp;
    (x, y, z)
}

fn azimuth(num: f64, den: f64, norm: f64) -> f64 {
    if num.hypot(den) <= AZIMUTH_DEGENERATE_REL * norm {
        0.0
    } else {
        num.atan2(den)
    }
}

fn elevation(z: f64, norm: f64) -> f64 {
    (z / norm).clamp(-1.0, 1.0).acos()
}

/// Path angles for a wave from `source` reflected at `at` towards `dest`.
pub fn path_angles_between(source: &Vec3, at: &Vec3, dest: &Vec3, rot: Rotation) -> Result<PathAngles> {
    let d_src = source - at;
    let d_dst = dest - at;
    let n_src = d_src.norm();
    let n_dst = d_dst.norm();
    if n_src == 0.0 || n_dst == 0.0 {
        return Err(Error::domain("source or destination coincides with the IRS point"));
    }
    let (xb, yb, zb) = local_components(&d_src, rot);
    let (xu, yu, zu) = local_components(&d_dst, rot);
    Ok(PathAngles {
        theta_i: azimuth(-yb, xb, n_src),
        phi_i: elevation(zb, n_src),
        theta_r: azimuth(yu, xu, n_dst),
        phi_r: elevation(zu, n_dst),
    })
}

/// Path angles at the IRS centre for the BS and a user at `user`.
pub fn path_angles(scn: &Scenario, rot: Rotation, user: &Vec3) -> Result<PathAngles> {
    path_angles_between(&scn.bs_center, &scn.irs_center, user, rot)
}

/// Front-of-surface test with the local `z` slacks of the BS and the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub z_bs: f64,
    pub z_user: f64,
}

impl Feasibility {
    /// `max(0, -z_B) + max(0, -z_U)`.
    pub fn violation(&self) -> f64 {
        (-self.z_bs).max(0.0) + (-self.z_user).max(0.0)
    }
}

pub fn feasible(scn: &Scenario, rot: Rotation, user: &Vec3) -> Feasibility {
    let (_, _, z_bs) = local_components(&(scn.bs_center - scn.irs_center), rot);
    let (_, _, z_user) = local_components(&(user - scn.irs_center), rot);
    Feasibility {
        feasible: z_bs >= 0.0 && z_user >= 0.0,
        z_bs,
        z_user,
    }
}
