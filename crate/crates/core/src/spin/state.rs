use crate::error::{Error, Result};
use crate::linalg::{c, frobenius, hermitian_eigenvalues, hermiticity_defect, outer, trace, CMatrix, CVector, C64};

use super::SpinValue;

const NORM_TOL: f64 = 1e-12;
const HERMITEAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

fn check_dim(spin: SpinValue, found: usize) -> Result<()> {
    if spin.dim() != found {
        return Err(Error::DimensionMismatch { expected: spin.dim(), found });
    }
    Ok(())
}

/// A normalized state vector in the `Ŝz` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    spin: SpinValue,
    amplitudes: CVector,
}

impl PureState {
    /// Wraps amplitudes that are already normalized to within `1e−12`.
    pub fn new(spin: SpinValue, amplitudes: CVector) -> Result<Self> {
        check_dim(spin, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm * norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm² = {} is not 1", norm * norm)));
        }
        Ok(PureState { spin, amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(spin: SpinValue, amplitudes: CVector) -> Result<Self> {
        check_dim(spin, amplitudes.len())?;
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(PureState { spin, amplitudes: amplitudes.unscale(norm) })
    }

    /// The basis state `|m⟩` with `m = two_m / 2`.
    pub fn basis(spin: SpinValue, two_m: i32) -> Result<Self> {
        let idx = spin
            .index_of_two_m(two_m)
            .ok_or_else(|| Error::InvalidParameter(format!("m = {two_m}/2 is not a projection of s = {spin}")))?;
        let mut amps = CVector::zeros(spin.dim());
        amps[idx] = c(1.0, 0.0);
        Ok(PureState { spin, amplitudes: amps })
    }

    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// Global phase fixed so that the first nonzero amplitude is real and positive.
    pub fn gauge_normal(&self) -> PureState {
        let pivot = self.amplitudes.iter().position(|z| z.norm() > 0.0);
        let amplitudes = match pivot {
            Some(j) => {
                let z = self.amplitudes[j];
                let phase = z / z.norm();
                let mut a = self.amplitudes.map(|w| w * phase.conj());
                a[j] = c(z.norm(), 0.0);
                a
            }
            None => self.amplitudes.clone(),
        };
        PureState { spin: self.spin, amplitudes }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            spin: self.spin,
            matrix: outer(&self.amplitudes, &self.amplitudes),
        }
    }

    /// Amplitude-wise complex conjugate.
    pub fn conjugate(&self) -> PureState {
        PureState { spin: self.spin, amplitudes: self.amplitudes.map(|z| z.conj()) }
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &GenericOperator) -> Result<C64> {
        check_dim(self.spin, op.matrix.nrows())?;
        Ok(self.amplitudes.dotc(&(&op.matrix * &self.amplitudes)))
    }
}

/// A hermitean, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    spin: SpinValue,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(spin: SpinValue, matrix: CMatrix) -> Result<Self> {
        check_dim(spin, matrix.nrows())?;
        check_dim(spin, matrix.ncols())?;
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITEAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let tr = trace(&matrix);
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigenvalues(&matrix).last().copied().unwrap_or(0.0);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { spin, matrix })
    }

    pub(crate) fn new_unchecked(spin: SpinValue, matrix: CMatrix) -> Self {
        DensityMatrix { spin, matrix }
    }

    pub fn maximally_mixed(spin: SpinValue) -> Self {
        let d = spin.dim();
        DensityMatrix { spin, matrix: CMatrix::identity(d, d).unscale(d as f64) }
    }

    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        trace(&self.matrix)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Frobenius distance `‖self − other‖_F`.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        frobenius(&(&self.matrix - &other.matrix))
    }

    /// Trace distance `½‖self − other‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        0.5 * hermitian_eigenvalues(&(&self.matrix - &other.matrix))
            .iter()
            .map(|x| x.abs())
            .sum::<f64>()
    }

    /// `U ρ U†`.
    pub fn transformed(&self, u: &CMatrix) -> DensityMatrix {
        DensityMatrix { spin: self.spin, matrix: u * &self.matrix * u.adjoint() }
    }

    /// Convex combination `a·self + (1−a)·other`.
    pub fn mix(&self, other: &DensityMatrix, a: f64) -> DensityMatrix {
        DensityMatrix {
            spin: self.spin,
            matrix: self.matrix.scale(a) + other.matrix.scale(1.0 - a),
        }
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        psi.to_density()
    }
}

/// An arbitrary (not necessarily hermitean) operator on the spin space.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericOperator {
    spin: SpinValue,
    matrix: CMatrix,
}

impl GenericOperator {
    pub fn new(spin: SpinValue, matrix: CMatrix) -> Result<Self> {
        check_dim(spin, matrix.nrows())?;
        check_dim(spin, matrix.ncols())?;
        Ok(GenericOperator { spin, matrix })
    }

    pub fn identity(spin: SpinValue) -> Self {
        let d = spin.dim();
        GenericOperator { spin, matrix: CMatrix::identity(d, d) }
    }

    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_hermitean(&self, tol: f64) -> bool {
        hermiticity_defect(&self.matrix) <= tol
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &GenericOperator, b: C64) -> Result<GenericOperator> {
        check_dim(self.spin, other.matrix.nrows())?;
        Ok(GenericOperator { spin: self.spin, matrix: &self.matrix * a + &other.matrix * b })
    }
}

/// `Tr(ρ O)`.
pub fn expectation(state: &DensityMatrix, op: &GenericOperator) -> Result<C64> {
    if state.spin != op.spin {
        return Err(Error::DimensionMismatch { expected: state.spin.dim(), found: op.spin.dim() });
    }
    let (rho, o) = (&state.matrix, &op.matrix);
    let d = rho.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += rho[(i, k)] * o[(k, i)];
        }
    }
    Ok(acc)
}
