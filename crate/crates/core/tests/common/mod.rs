#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix3;
use num_complex::Complex64;
use proptest::prelude::*;
use rotirs::channel::BsIrsChannel;
use rotirs::{Rotation, Scenario, Vec3};

/// Orientation matrix written out entry by entry.
pub fn q_matrix(theta: f64, phi: f64) -> Matrix3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Matrix3::new(
        ct * sp,
        st,
        ct * cp, //
        -st * sp,
        ct,
        -st * cp, //
        -cp,
        0.0,
        sp,
    )
}

pub fn local(p: &Vec3, center: &Vec3, theta: f64, phi: f64) -> Vec3 {
    q_matrix(theta, phi).transpose() * (p - center)
}

/// Signed difference of two angles folded into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Largest entrywise phase discrepancy between two channels.
pub fn max_phase_error(a: &BsIrsChannel, b: &BsIrsChannel) -> f64 {
    a.entries
        .iter()
        .zip(b.entries.iter())
        .map(|(x, y): (&Complex64, &Complex64)| angle_diff(x.arg(), y.arg()).abs())
        .fold(0.0, f64::max)
}

pub fn rotation() -> impl Strategy<Value = Rotation> {
    (-PI / 2.0..=PI / 2.0, -PI / 2.0..=PI / 2.0).prop_map(|(t, p)| Rotation::new(t, p).unwrap())
}

/// Ground BS and user, IRS mounted on the `x = 0` wall.
pub fn wall_geometry() -> impl Strategy<Value = (Vec3, Vec3, Vec3)> {
    (
        (5.0..90.0f64, 0.0..100.0f64),
        (10.0..90.0f64, 3.0..40.0f64),
        (2.0..80.0f64, 0.0..150.0f64),
    )
        .prop_map(|((xb, yb), (yc, zc), (xu, yu))| {
            (Vec3::new(xb, yb, 0.0), Vec3::new(0.0, yc, zc), Vec3::new(xu, yu, 0.0))
        })
}

pub fn scenario_with(bs: Vec3, irs: Vec3) -> Scenario {
    Scenario {
        bs_center: bs,
        irs_center: irs,
        ..Scenario::reference()
    }
}

pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}
