use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Orientation of a Stern-Gerlach apparatus, in spherical angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    theta: f64,
    phi: f64,
}

impl Axis {
    /// `theta` must lie in `[0, π]`; `phi` is reduced to `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!("polar angle {theta} outside [0, π]")));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Axis { theta, phi })
    }

    /// Axis along a nonzero direction vector (normalized internally).
    pub fn from_direction(n: [f64; 3]) -> Result<Self> {
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NonUnitAxis { norm });
        }
        let z = (n[2] / norm).clamp(-1.0, 1.0);
        let theta = z.acos();
        let phi = if n[0] == 0.0 && n[1] == 0.0 { 0.0 } else { n[1].atan2(n[0]) };
        Axis::new(theta, phi)
    }

    pub fn x() -> Self {
        Axis { theta: PI / 2.0, phi: 0.0 }
    }

    pub fn y() -> Self {
        Axis { theta: PI / 2.0, phi: PI / 2.0 }
    }

    pub fn z() -> Self {
        Axis { theta: 0.0, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Angle between the two directions, in `[0, π]`.
    pub fn angle_to(&self, other: &Axis) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let cross = cross(a, b);
        let sin = cross.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cos = dot(a, b);
        sin.atan2(cos)
    }
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Rotates `v` by `angle` about the unit direction `n` (Rodrigues' formula).
pub fn rotate_vector(v: [f64; 3], n: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let k = cross(n, v);
    let kd = dot(n, v);
    [
        v[0] * c + k[0] * s + n[0] * kd * (1.0 - c),
        v[1] * c + k[1] * s + n[1] * kd * (1.0 - c),
        v[2] * c + k[2] * s + n[2] * kd * (1.0 - c),
    ]
}

/// `e1 · (e2 × e3)`.
pub fn triple_product(e1: &Axis, e2: &Axis, e3: &Axis) -> f64 {
    dot(e1.unit_vector(), cross(e2.unit_vector(), e3.unit_vector()))
}
