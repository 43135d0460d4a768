//! Stern-Gerlach measurement simulation: axes, quorum geometries, outcome
//! probabilities and intensity tables.

mod axis;
mod quorum;
mod sampling;
mod table;

pub use axis::{rotate_vector, triple_product, Axis};
pub use quorum::{cone_axes, default_tripod, tripod_axes, QuorumKind, QuorumSpec, TRIPOD_TOL};
pub use sampling::{measure_exact, measure_exact_pure, measure_sampled, multinomial_counts};
pub use table::{IntensityTable, Provenance};

pub(crate) use sampling::axis_rng;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::spin::{rotation_to_axis, DensityMatrix, PureState};

/// Largest total-probability defect still treated as round-off.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Clamps round-off negatives and renormalizes, rejecting anything that is
/// not a probability vector up to round-off.
pub(crate) fn clean_probabilities(mut p: Vec<f64>) -> Result<Vec<f64>> {
    if let Some(&worst) = p.iter().min_by(|a, b| a.total_cmp(b)) {
        if worst < -NORMALIZATION_TOL || !worst.is_finite() {
            return Err(Error::InvalidProbabilities(format!("negative probability {worst:.3e}")));
        }
    }
    for x in p.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidProbabilities(format!("probabilities sum to {total}")));
    }
    for x in p.iter_mut() {
        *x /= total;
    }
    Ok(p)
}

/// Diagonal of `U† ρ U`.
pub(crate) fn rotated_diagonal(rho: &CMatrix, u: &CMatrix) -> Vec<f64> {
    let d = rho.nrows();
    (0..d)
        .map(|j| {
            let col = u.column(j);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                let mut row = C64::new(0.0, 0.0);
                for k in 0..d {
                    row += rho[(i, k)] * col[k];
                }
                acc += col[i].conj() * row;
            }
            acc.re
        })
        .collect()
}

/// Outcome probabilities `p_m = ⟨m, n|ρ|m, n⟩` for a Stern-Gerlach apparatus
/// along `axis`, ordered `m = s, …, −s`.
pub fn sg_probabilities(rho: &DensityMatrix, axis: &Axis) -> Result<Vec<f64>> {
    let u = rotation_to_axis(rho.spin(), axis);
    clean_probabilities(rotated_diagonal(rho.matrix(), &u))
}

/// As [`sg_probabilities`] for a pure state, `p_m = |⟨m, n|ψ⟩|²`.
pub fn sg_probabilities_pure(psi: &PureState, axis: &Axis) -> Result<Vec<f64>> {
    let u = rotation_to_axis(psi.spin(), axis);
    let amps = u.adjoint() * psi.amplitudes();
    clean_probabilities(amps.iter().map(|z| z.norm_sqr()).collect())
}
