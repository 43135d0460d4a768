use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, pseudo_inverse, CMatrix, CVector, I};
use crate::measurement::{triple_product, IntensityTable, TRIPOD_TOL};
use crate::optim::{levenberg_marquardt, LmOptions};
use crate::spin::{rng_from_seed, rotation_to_axis, PureState, SpinValue};

use super::ZERO_AMPLITUDE_TOL;

#[derive(Debug, Clone, Copy)]
pub struct PureOptions {
    /// Residual at which a seed counts as converged.
    pub tolerance: f64,
    /// Refine every sign-pattern seed and pick by (residual, pattern index)
    /// instead of stopping at the first converged pattern.
    pub exhaustive: bool,
    /// Random seeds tried after the sign patterns fail.
    pub random_restarts: usize,
    pub seed: u64,
}

impl Default for PureOptions {
    fn default() -> Self {
        PureOptions { tolerance: 1e-8, exhaustive: false, random_restarts: 64, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct PureReconstruction {
    pub state: PureState,
    /// ℓ₂ misfit over all three axes.
    pub residual: f64,
    /// Seed index: sign patterns first, then random restarts.
    pub seed_index: usize,
    pub seeds_tried: usize,
}

/// Independent numbers in a three-axis table: `3(2s+1)` intensities less
/// one normalization per axis.
pub fn measured_numbers(spin: SpinValue) -> usize {
    3 * spin.dim() - 3
}

struct PhaseProblem {
    moduli: Vec<f64>,
    /// `W_k = U_k† U_1` for axes 2 and 3.
    transfers: Vec<CMatrix>,
    targets: Vec<Vec<f64>>,
}

impl PhaseProblem {
    fn amplitudes(&self, free: &[f64]) -> CVector {
        let mut b = CVector::zeros(self.moduli.len());
        b[0] = c(self.moduli[0], 0.0);
        for (j, &chi) in free.iter().enumerate() {
            b[j + 1] = c(self.moduli[j + 1] * chi.cos(), self.moduli[j + 1] * chi.sin());
        }
        b
    }

    fn eval(&self, free: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.moduli.len();
        let b = self.amplitudes(free);
        let rows = self.transfers.len() * d;
        let mut r = DVector::zeros(rows);
        let mut jac = DMatrix::zeros(rows, d - 1);
        for (k, (w, target)) in self.transfers.iter().zip(&self.targets).enumerate() {
            let amp = w * &b;
            for m in 0..d {
                r[k * d + m] = amp[m].norm_sqr() - target[m];
                for j in 1..d {
                    // ∂p_m/∂χ_j = 2 Re(conj(c_m) W_mj i b_j)
                    jac[(k * d + m, j - 1)] = 2.0 * (amp[m].conj() * w[(m, j)] * I * b[j]).re;
                }
            }
        }
        (r, jac)
    }

    /// Magnitudes of consecutive phase differences from the minimum-norm
    /// solution of the intensity equations, linear in `b̄_j b_l`.
    fn linear_delta_estimate(&self) -> Vec<f64> {
        let d = self.moduli.len();
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|j| ((j + 1)..d).map(move |l| (j, l))).collect();
        let rows = self.transfers.len() * d;
        let mut a = DMatrix::zeros(rows, 2 * pairs.len());
        let mut y = DVector::zeros(rows);
        for (k, (w, target)) in self.transfers.iter().zip(&self.targets).enumerate() {
            for m in 0..d {
                let diag: f64 = (0..d).map(|j| w[(m, j)].norm_sqr() * self.moduli[j].powi(2)).sum();
                y[k * d + m] = target[m] - diag;
                for (p, &(j, l)) in pairs.iter().enumerate() {
                    let coef = w[(m, j)].conj() * w[(m, l)];
                    a[(k * d + m, 2 * p)] = 2.0 * coef.re;
                    a[(k * d + m, 2 * p + 1)] = -2.0 * coef.im;
                }
            }
        }
        let x = pseudo_inverse(&a, 1e-10) * y;
        (0..d - 1)
            .map(|j| {
                let p = pairs.iter().position(|&pr| pr == (j, j + 1)).expect("consecutive pair");
                let z = c(x[2 * p], x[2 * p + 1]);
                if z.norm() > 1e-12 {
                    z.arg().abs()
                } else {
                    FRAC_PI_2
                }
            })
            .collect()
    }
}

fn pattern_seed(deltas: &[f64], pattern: u32) -> Vec<f64> {
    let mut chi = 0.0;
    deltas
        .iter()
        .enumerate()
        .map(|(j, &delta)| {
            chi += if pattern >> j & 1 == 1 { -delta } else { delta };
            chi
        })
        .collect()
}

/// Recovers a pure state from intensities on three non-coplanar axes: moduli
/// from axis 1, the `2s` relative phases by least squares on axes 2 and 3.
pub fn reconstruct_pure(table: &IntensityTable, opts: &PureOptions) -> Result<PureReconstruction> {
    let axes = table.axes();
    if axes.len() != 3 {
        return Err(Error::NotTripod(format!("{} axes given, need 3", axes.len())));
    }
    let tp = triple_product(&axes[0], &axes[1], &axes[2]);
    if tp.abs() <= TRIPOD_TOL {
        return Err(Error::NotTripod(format!("axes are coplanar (triple product {tp:.3e})")));
    }
    let spin = table.spin();
    let d = spin.dim();
    let moduli: Vec<f64> = table.probabilities(0).iter().map(|p| p.max(0.0).sqrt()).collect();
    if let Some(j) = moduli.iter().position(|&r| r <= ZERO_AMPLITUDE_TOL) {
        return Err(Error::ZeroAmplitude { two_m: spin.two_m(j) });
    }
    let u1 = rotation_to_axis(spin, &axes[0]);
    let problem = PhaseProblem {
        moduli,
        transfers: axes[1..].iter().map(|a| rotation_to_axis(spin, a).adjoint() * &u1).collect(),
        targets: (1..3).map(|k| table.probabilities(k).to_vec()).collect(),
    };
    let full_residual = |r: f64| {
        // axis 1 is reproduced up to the rounding of √p
        let r1: f64 = problem.moduli.iter().zip(table.probabilities(0)).map(|(m, p)| (m * m - p).powi(2)).sum();
        (r * r + r1).sqrt()
    };
    let lm = LmOptions { max_iterations: 200, gradient_tol: 1e-12, residual_tol: opts.tolerance * 1e-3, step_tol: 1e-15 };

    let mut seeds: Vec<Vec<f64>> = Vec::new();
    let linear = problem.linear_delta_estimate();
    let quarter = vec![FRAC_PI_2; d - 1];
    for base in [&linear, &quarter] {
        for pattern in 0..(1u32 << spin.two_s()) {
            seeds.push(pattern_seed(base, pattern));
        }
    }
    let mut rng = rng_from_seed(opts.seed);
    for _ in 0..opts.random_restarts {
        seeds.push((0..d - 1).map(|_| rng.random_range(-PI..PI)).collect());
    }

    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut tried = 0;
    for (i, seed) in seeds.iter().enumerate() {
        let converged = best.as_ref().is_some_and(|b| b.0 <= opts.tolerance);
        if converged && !(opts.exhaustive && i < 1usize << spin.two_s()) {
            break;
        }
        tried += 1;
        let res = levenberg_marquardt(|x| problem.eval(x), seed, &lm);
        let residual = full_residual(res.residual);
        if best.as_ref().is_none_or(|b| residual < b.0) {
            best = Some((residual, i, res.x));
        }
    }
    let (residual, seed_index, chi) = best.expect("at least one seed");
    if residual > opts.tolerance {
        return Err(Error::NoConvergence { residual, seeds: tried });
    }
    let state = PureState::normalized(spin, &u1 * problem.amplitudes(&chi))?.gauge_normal();
    Ok(PureReconstruction { state, residual, seed_index, seeds_tried: tried })
}
