//! Pure-state reconstruction from three Stern-Gerlach axes, Pauli partners of
//! nearby-axis data, and a numerical probe of the three-axis uniqueness
//! statement.

mod partners;
mod recon;
mod uniqueness;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{c, wrap_angle, CMatrix};
use crate::measurement::{sg_probabilities_pure, QuorumSpec};
use crate::spin::{PureState, SpinValue};

pub use partners::{
    first_order_response, partners_nearby_axes, select_by_third_axis, PartnerSet, NEARBY_TILT_PHI, ZERO_AMPLITUDE_TOL,
};
pub use recon::{measured_numbers, reconstruct_pure, PureOptions, PureReconstruction};
pub use uniqueness::{nonconstancy, triple_defect, uniqueness_probe, Frame, UniquenessOptions, UniquenessReport};

/// Two states count as the same ray above this fidelity.
pub const SAME_RAY_FIDELITY: f64 = 1.0 - 1e-9;

/// Tolerance of [`verify_same_intensities`].
pub const SAME_INTENSITY_TOL: f64 = 1e-10;

/// Phases of the amplitudes, gauge-fixed to zero at the first nonzero
/// amplitude and wrapped into `(−π, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    spin: SpinValue,
    chi: Vec<f64>,
}

impl PhaseVector {
    pub fn of(psi: &PureState) -> Self {
        let amps = psi.amplitudes();
        let pivot = amps.iter().position(|z| z.norm() > 0.0).unwrap_or(0);
        let ref_phase = amps[pivot].arg();
        let chi = amps
            .iter()
            .enumerate()
            .map(|(j, z)| if j == pivot || z.norm() == 0.0 { 0.0 } else { wrap_angle(z.arg() - ref_phase) })
            .collect();
        PhaseVector { spin: psi.spin(), chi }
    }

    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// Consecutive differences `χ_{j+1} − χ_j`, wrapped.
    pub fn differences(&self) -> Vec<f64> {
        self.chi.windows(2).map(|w| wrap_angle(w[1] - w[0])).collect()
    }
}

/// Real polynomial `f(x) = Σ_σ f_σ x^σ` of degree at most `2s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePolynomial {
    spin: SpinValue,
    coefficients: Vec<f64>,
}

impl PhasePolynomial {
    pub fn new(spin: SpinValue, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() > spin.dim() {
            return Err(Error::InvalidParameter(format!(
                "degree {} exceeds 2s = {}",
                coefficients.len() - 1,
                spin.two_s()
            )));
        }
        Ok(PhasePolynomial { spin, coefficients })
    }

    pub fn constant(spin: SpinValue, value: f64) -> Self {
        PhasePolynomial { spin, coefficients: vec![value] }
    }

    /// The polynomial taking `values[j]` at `x = m(j)`.
    pub fn interpolate(spin: SpinValue, values: &[f64]) -> Result<Self> {
        let d = spin.dim();
        if values.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: values.len() });
        }
        let vander = DMatrix::from_fn(d, d, |j, k| spin.m(j).powi(k as i32));
        let coeffs = vander
            .lu()
            .solve(&DVector::from_column_slice(values))
            .ok_or_else(|| Error::InvalidParameter("singular Vandermonde system".into()))?;
        Ok(PhasePolynomial { spin, coefficients: coeffs.iter().copied().collect() })
    }

    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    /// Values at the projections `m = s, …, −s`.
    pub fn values(&self) -> Vec<f64> {
        (0..self.spin.dim()).map(|j| self.eval(self.spin.m(j))).collect()
    }

    /// `exp(i f(n·Ŝ))` given the rotation `u` whose columns are the `n·Ŝ`
    /// eigenvectors ordered `m = s, …, −s`.
    pub fn phase_operator(&self, u: &CMatrix) -> CMatrix {
        let phases = DVector::from_iterator(
            self.spin.dim(),
            self.values().into_iter().map(|v| c(v.cos(), v.sin())),
        );
        u * CMatrix::from_diagonal(&phases) * u.adjoint()
    }
}

/// Whether `psi` and `psi_tilde` give the same intensities on every quorum
/// axis within [`SAME_INTENSITY_TOL`].
pub fn verify_same_intensities(psi: &PureState, psi_tilde: &PureState, quorum: &QuorumSpec) -> Result<bool> {
    if psi.spin() != psi_tilde.spin() {
        return Err(Error::DimensionMismatch { expected: psi.spin().dim(), found: psi_tilde.spin().dim() });
    }
    Ok(max_intensity_gap(psi, psi_tilde, quorum)? <= SAME_INTENSITY_TOL)
}

/// Largest intensity difference over all quorum axes and outcomes.
pub fn max_intensity_gap(psi: &PureState, psi_tilde: &PureState, quorum: &QuorumSpec) -> Result<f64> {
    let mut gap: f64 = 0.0;
    for axis in quorum.axes() {
        let a = sg_probabilities_pure(psi, axis)?;
        let b = sg_probabilities_pure(psi_tilde, axis)?;
        gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(gap, f64::max);
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use crate::measurement::{default_tripod, Axis};
    use crate::spin::{random_pure, rotation_to_axis, spin_operators};

    #[test]
    fn interpolation_reproduces_values() {
        let spin = SpinValue::from_two_s(5);
        let vals: Vec<f64> = (0..6).map(|j| (j as f64 * 0.7).sin()).collect();
        let p = PhasePolynomial::interpolate(spin, &vals).unwrap();
        for (a, b) in p.values().iter().zip(&vals) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_phase_operator_is_rotation() {
        // exp(i·t·Ŝz) for f(x) = t·x
        let spin = SpinValue::ONE;
        let t = 0.8;
        let f = PhasePolynomial::new(spin, vec![0.0, t]).unwrap();
        let u = rotation_to_axis(spin, &Axis::z());
        let expected = crate::linalg::exp_minus_i(&spin_operators(spin).sz, -t);
        assert!(frobenius(&(f.phase_operator(&u) - expected)) < 1e-12);
    }

    #[test]
    fn phase_vector_gauge() {
        let psi = random_pure(SpinValue::ONE, 3);
        let pv = PhaseVector::of(&psi);
        assert_eq!(pv.chi()[0], 0.0);
        assert!(pv.chi().iter().all(|x| x.abs() <= std::f64::consts::PI));
        let gauge = PhaseVector::of(&psi.gauge_normal());
        for (a, b) in pv.chi().iter().zip(gauge.chi()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sz_phase_keeps_z_intensities_only() {
        let spin = SpinValue::ONE;
        let psi = random_pure(spin, 8);
        let h = PhasePolynomial::new(spin, vec![0.1, 0.4, 0.9]).unwrap();
        let u = rotation_to_axis(spin, &Axis::z());
        let tilde = PureState::new(spin, h.phase_operator(&u) * psi.amplitudes()).unwrap();
        let z_only = QuorumSpec::explicit(vec![Axis::z()]).unwrap();
        assert!(verify_same_intensities(&psi, &tilde, &z_only).unwrap());
        assert!(!verify_same_intensities(&psi, &tilde, &default_tripod()).unwrap());
    }

    #[test]
    fn global_phase_is_invisible() {
        let psi = random_pure(SpinValue::from_two_s(3), 1);
        let shifted = PureState::new(psi.spin(), psi.amplitudes() * c(0.3f64.cos(), 0.3f64.sin())).unwrap();
        let q = crate::measurement::cone_axes(5, 0.7).unwrap();
        assert!(verify_same_intensities(&psi, &shifted, &q).unwrap());
    }

    #[test]
    fn spin_mismatch_is_an_error() {
        let a = random_pure(SpinValue::HALF, 1);
        let b = random_pure(SpinValue::ONE, 1);
        assert!(verify_same_intensities(&a, &b, &default_tripod()).is_err());
    }
}
