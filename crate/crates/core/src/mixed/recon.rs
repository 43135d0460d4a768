use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitize, spectral_function, c, RMatrix};
use crate::measurement::{IntensityTable, QuorumSpec};
use crate::spin::{DensityMatrix, SpinValue};

use super::map::{build_map, MeasurementMap, RANK_TOL};

/// Largest angular mismatch tolerated between table axes and quorum axes.
const AXIS_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct MixedOptions {
    /// Solve rank-deficient problems in the minimum-norm sense instead of
    /// failing with `NotInjective`.
    pub allow_minimum_norm: bool,
    /// Residual above which an exact table is declared inconsistent.
    pub consistency_tol: f64,
    /// Most negative eigenvalue accepted without projecting onto the
    /// positive cone.
    pub positivity_tol: f64,
}

impl Default for MixedOptions {
    fn default() -> Self {
        MixedOptions { allow_minimum_norm: false, consistency_tol: 1e-8, positivity_tol: 1e-10 }
    }
}

/// Rank and conditioning of the map a reconstruction was solved with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapDiagnostics {
    pub rank: usize,
    pub nullity: usize,
    pub condition_number: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconMethod {
    LinearInversion,
    PurePhaseRetrieval,
}

/// Estimated state with fit diagnostics.
#[derive(Debug, Clone)]
pub struct ReconResult {
    pub rho_hat: DensityMatrix,
    /// ℓ₂ misfit between predicted and given probabilities, before any
    /// positivity projection.
    pub residual: f64,
    pub injective: bool,
    pub method: ReconMethod,
    pub diagnostics: Option<MapDiagnostics>,
    /// Whether eigenvalue clipping was applied.
    pub projected: bool,
    /// Smallest eigenvalue of the unprojected estimate.
    pub min_eigenvalue: f64,
}

/// Linear-inversion estimator for a fixed quorum, with the pseudo-inverse of
/// the traceless block precomputed.
#[derive(Debug, Clone)]
pub struct MixedReconstructor {
    map: MeasurementMap,
    pinv: RMatrix,
    identity_column: DVector<f64>,
}

impl MixedReconstructor {
    pub fn new(spin: SpinValue, quorum: &QuorumSpec) -> Result<Self> {
        let map = build_map(spin, quorum)?;
        let pinv = crate::linalg::pseudo_inverse(&map.traceless_block(), RANK_TOL);
        let identity_column = map.matrix().column(0).into_owned();
        Ok(MixedReconstructor { map, pinv, identity_column })
    }

    pub fn map(&self) -> &MeasurementMap {
        &self.map
    }

    /// Linear map from stacked probabilities to traceless coordinates.
    pub fn pseudo_inverse(&self) -> &RMatrix {
        &self.pinv
    }

    fn diagnostics(&self) -> MapDiagnostics {
        MapDiagnostics {
            rank: self.map.rank(),
            nullity: self.map.deficit(),
            condition_number: self.map.condition_number(),
        }
    }

    /// Hermitean-basis coordinates (trace fixed to one) fitted to `y`.
    pub fn solve_coords(&self, y: &[f64]) -> Vec<f64> {
        let d = self.map.spin().dim();
        let x0 = 1.0 / (d as f64).sqrt();
        let rhs = DVector::from_column_slice(y) - &self.identity_column * x0;
        let traceless = &self.pinv * rhs;
        std::iter::once(x0).chain(traceless.iter().copied()).collect()
    }

    fn check_table(&self, table: &IntensityTable) -> Result<()> {
        if table.spin() != self.map.spin() {
            return Err(Error::DimensionMismatch { expected: self.map.spin().dim(), found: table.spin().dim() });
        }
        let axes = self.map.quorum().axes();
        if table.num_axes() != axes.len() {
            return Err(Error::QuorumMismatch(format!("table has {} axes, quorum {}", table.num_axes(), axes.len())));
        }
        for (k, (a, b)) in table.axes().iter().zip(axes).enumerate() {
            let angle = a.angle_to(b);
            if angle > AXIS_MATCH_TOL {
                return Err(Error::QuorumMismatch(format!("axis {k} differs by {angle:.3e} rad")));
            }
        }
        Ok(())
    }

    pub fn reconstruct(&self, table: &IntensityTable, opts: &MixedOptions) -> Result<ReconResult> {
        self.check_table(table)?;
        self.reconstruct_stacked(&table.stacked(), table.is_exact(), opts)
    }

    /// Reconstruction from stacked probabilities in quorum order.
    pub fn reconstruct_stacked(&self, y: &[f64], exact: bool, opts: &MixedOptions) -> Result<ReconResult> {
        let injective = self.map.is_injective();
        if !injective && !opts.allow_minimum_norm {
            return Err(Error::NotInjective { rank: self.map.rank(), nullity: self.map.deficit() });
        }
        if y.len() != self.map.matrix().nrows() {
            return Err(Error::DimensionMismatch { expected: self.map.matrix().nrows(), found: y.len() });
        }
        let coords = self.solve_coords(y);
        let predicted = self.map.apply(&coords);
        let residual = predicted.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        if exact && residual > opts.consistency_tol {
            return Err(Error::InconsistentData { residual, tolerance: opts.consistency_tol });
        }
        let raw = hermitize(&self.map.basis().from_coords(&coords));
        let (values, vectors) = hermitian_eigen(&raw);
        let min_eigenvalue = values.last().copied().unwrap_or(0.0);
        let spin = self.map.spin();
        let (matrix, projected) = if min_eigenvalue < -opts.positivity_tol {
            let total: f64 = values.iter().map(|&v| v.max(0.0)).sum();
            let clipped = spectral_function(&values, &vectors, |v| c(v.max(0.0) / total, 0.0));
            (hermitize(&clipped), true)
        } else {
            (raw, false)
        };
        Ok(ReconResult {
            rho_hat: DensityMatrix::new_unchecked(spin, matrix),
            residual,
            injective,
            method: ReconMethod::LinearInversion,
            diagnostics: Some(self.diagnostics()),
            projected,
            min_eigenvalue,
        })
    }
}

/// Linear-inversion reconstruction of a density matrix from an intensity
/// table measured on `quorum`.
pub fn reconstruct_mixed(table: &IntensityTable, quorum: &QuorumSpec, opts: &MixedOptions) -> Result<ReconResult> {
    MixedReconstructor::new(table.spin(), quorum)?.reconstruct(table, opts)
}
