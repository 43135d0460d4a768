use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{rank_and_singular_values, RMatrix};
use crate::measurement::{rotated_diagonal, QuorumSpec};
use crate::spin::{rotation_to_axis, SpinValue};

use super::HermitianBasis;

/// Relative SVD threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// The real linear map from hermitean-basis coordinates to the stacked
/// outcome probabilities of a quorum.
#[derive(Debug, Clone)]
pub struct MeasurementMap {
    spin: SpinValue,
    quorum: QuorumSpec,
    basis: HermitianBasis,
    matrix: RMatrix,
    rank: usize,
    traceless_singular_values: Vec<f64>,
    traceless_rank: usize,
}

impl MeasurementMap {
    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn quorum(&self) -> &QuorumSpec {
        &self.quorum
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.basis
    }

    /// `(axes · (2s+1)) × (2s+1)²` matrix; column 0 belongs to `I/√d`.
    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    /// Block acting on the traceless coordinates (columns `1..`).
    pub fn traceless_block(&self) -> RMatrix {
        self.matrix.columns(1, self.matrix.ncols() - 1).into_owned()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of real parameters of a hermitean matrix, `(2s+1)²`.
    pub fn full_dimension(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn deficit(&self) -> usize {
        self.full_dimension() - self.rank
    }

    /// Injective on the trace-one slice.
    pub fn is_injective(&self) -> bool {
        self.traceless_rank + 1 == self.full_dimension()
    }

    pub fn traceless_singular_values(&self) -> &[f64] {
        &self.traceless_singular_values
    }

    /// Condition number of the map restricted to the trace-one slice;
    /// infinite when that restriction is rank deficient.
    pub fn condition_number(&self) -> f64 {
        if !self.is_injective() {
            return f64::INFINITY;
        }
        let sv = &self.traceless_singular_values;
        match (sv.first(), sv.last()) {
            (Some(&max), Some(&min)) if min > 0.0 => max / min,
            // spin 0: nothing to invert
            _ if sv.is_empty() => 1.0,
            _ => f64::INFINITY,
        }
    }

    /// Stacked probabilities predicted for coordinates `x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(x);
        (&self.matrix * v).iter().copied().collect()
    }
}

/// Builds the measurement map of `quorum` for spin `spin`.
pub fn build_map(spin: SpinValue, quorum: &QuorumSpec) -> Result<MeasurementMap> {
    if quorum.is_empty() {
        return Err(Error::EmptyQuorum);
    }
    let d = spin.dim();
    let basis = HermitianBasis::new(d);
    let mut matrix = RMatrix::zeros(quorum.len() * d, d * d);
    for (k, axis) in quorum.axes().iter().enumerate() {
        let u = rotation_to_axis(spin, axis);
        for (a, b) in basis.elements().iter().enumerate() {
            for (j, p) in rotated_diagonal(b, &u).into_iter().enumerate() {
                matrix[(k * d + j, a)] = p;
            }
        }
    }
    let (rank, _) = rank_and_singular_values(&matrix, RANK_TOL);
    let traceless = matrix.columns(1, d * d - 1).into_owned();
    let (traceless_rank, traceless_singular_values) = rank_and_singular_values(&traceless, RANK_TOL);
    Ok(MeasurementMap {
        spin,
        quorum: quorum.clone(),
        basis,
        matrix,
        rank,
        traceless_singular_values,
        traceless_rank,
    })
}

/// Upper bound on the rank from per-axis normalization: `min((2s+1)², 2sK + 1)`.
pub fn counting_rank_bound(spin: SpinValue, axes: usize) -> usize {
    (spin.dim() * spin.dim()).min(spin.two_s() as usize * axes + 1)
}

/// Upper bound from the multipole decomposition: every axis contributes one
/// number per multipole order `l = 1..2s`, and order `l` has `2l + 1`
/// components, so the rank is at most `1 + Σ_l min(K, 2l + 1)`.
pub fn multipole_rank_bound(spin: SpinValue, axes: usize) -> usize {
    1 + (1..=spin.two_s() as usize).map(|l| axes.min(2 * l + 1)).sum::<usize>()
}

/// Injectivity certificate for a quorum.
#[derive(Debug, Clone, PartialEq)]
pub struct QuorumReport {
    pub spin: SpinValue,
    pub axes: usize,
    pub rank: usize,
    pub full_dimension: usize,
    pub deficit: usize,
    pub injective: bool,
    pub condition_number: f64,
    pub counting_bound: usize,
    pub multipole_bound: usize,
}

impl QuorumReport {
    /// Single `key=value` record.
    pub fn to_record(&self) -> String {
        format!(
            "spin={} axes={} rank={} dim={} deficit={} injective={} condition={} counting_bound={} multipole_bound={}",
            self.spin,
            self.axes,
            self.rank,
            self.full_dimension,
            self.deficit,
            self.injective,
            fmt_condition(self.condition_number),
            self.counting_bound,
            self.multipole_bound,
        )
    }
}

fn fmt_condition(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6e}")
    } else {
        "inf".to_string()
    }
}

impl fmt::Display for QuorumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "spin {}", self.spin)?;
        writeln!(f, "axes {}", self.axes)?;
        writeln!(f, "rank {} of {}", self.rank, self.full_dimension)?;
        writeln!(f, "deficit {}", self.deficit)?;
        writeln!(f, "injective {}", if self.injective { "yes" } else { "no" })?;
        writeln!(f, "condition {}", fmt_condition(self.condition_number))?;
        writeln!(f, "rank bound 2sK+1: {}", self.counting_bound)?;
        writeln!(f, "rank bound multipole: {}", self.multipole_bound)?;
        let two_s = self.spin.two_s() as usize;
        if self.axes == two_s + 1 && self.deficit > 0 {
            writeln!(
                f,
                "note: 2s+1 = {} axes leave {} parameter(s) undetermined; full rank needs at least 4s+1 = {} axes",
                self.axes,
                self.deficit,
                2 * two_s + 1
            )?;
        }
        Ok(())
    }
}

/// Rank, deficit and conditioning of a quorum's measurement map.
pub fn certify_quorum(spin: SpinValue, quorum: &QuorumSpec) -> Result<QuorumReport> {
    let map = build_map(spin, quorum)?;
    Ok(report_for(&map))
}

fn report_for(map: &MeasurementMap) -> QuorumReport {
    QuorumReport {
        spin: map.spin,
        axes: map.quorum.len(),
        rank: map.rank,
        full_dimension: map.full_dimension(),
        deficit: map.deficit(),
        injective: map.is_injective(),
        condition_number: map.condition_number(),
        counting_bound: counting_rank_bound(map.spin, map.quorum.len()),
        multipole_bound: multipole_rank_bound(map.spin, map.quorum.len()),
    }
}
