use crate::error::{Error, Result};
use crate::linalg::{exp_minus_i, CMatrix};
use crate::measurement::Axis;

use super::{spin_operators, SpinValue};

const UNIT_TOL: f64 = 1e-9;

/// Unitary taking the `Ŝz` eigenbasis to the `n·Ŝ` eigenbasis.
///
/// `U = exp(−iθ m̂·Ŝ)` with `m̂ = (−sin φ, cos φ, 0)`, so that column `j` of
/// `U` is the eigenvector of `n·Ŝ` with eigenvalue `m(j)`.
pub fn rotation_to_axis(spin: SpinValue, axis: &Axis) -> CMatrix {
    let d = spin.dim();
    if axis.theta() == 0.0 {
        return CMatrix::identity(d, d);
    }
    let (sp, cp) = axis.phi().sin_cos();
    let ops = spin_operators(spin);
    let generator = ops.component([-sp, cp, 0.0]);
    exp_minus_i(&generator, axis.theta())
}

/// As [`rotation_to_axis`] for a raw direction, which must be a unit vector.
pub fn rotation_to_vector(spin: SpinValue, n: [f64; 3]) -> Result<CMatrix> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitAxis { norm });
    }
    Ok(rotation_to_axis(spin, &Axis::from_direction(n)?))
}

/// `exp(−i angle · n·Ŝ)` for a unit direction `n`.
pub fn rotation_about(spin: SpinValue, n: [f64; 3], angle: f64) -> Result<CMatrix> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitAxis { norm });
    }
    Ok(exp_minus_i(&spin_operators(spin).component(n), angle))
}
