use std::f64::consts::PI;
use std::fmt;

use nalgebra::DVector;
use rand::Rng;

use crate::error::Result;
use crate::linalg::{c, CMatrix, CVector};
use crate::measurement::Axis;
use crate::optim::{levenberg_marquardt, numeric_jacobian, LmOptions};
use crate::spin::{rng_from_seed, rotation_to_axis, PureState, SpinValue};

use super::PhasePolynomial;

/// Axes carrying the phase polynomials `f`, `g`, `h`, in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub f_axis: Axis,
    pub g_axis: Axis,
    pub h_axis: Axis,
}

impl Default for Frame {
    fn default() -> Self {
        Frame { f_axis: Axis::x(), g_axis: Axis::y(), h_axis: Axis::z() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UniquenessOptions {
    pub trials: usize,
    pub seed: u64,
    /// Candidates with [`nonconstancy`] below this are penalized.
    pub nu_min: f64,
    pub penalty: f64,
    pub frame: Frame,
}

impl Default for UniquenessOptions {
    fn default() -> Self {
        UniquenessOptions { trials: 200, seed: 0, nu_min: 0.1, penalty: 1e4, frame: Frame::default() }
    }
}

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub trials: usize,
    /// Smallest penalized defect over all starts.
    pub best_defect: f64,
    /// Nonconstancy of the best `h`.
    pub best_nonconstancy: f64,
    pub f: PhasePolynomial,
    pub g: PhasePolynomial,
    pub h: PhasePolynomial,
    /// [`triple_defect`] evaluated on the reported polynomials.
    pub triple_defect: f64,
}

impl fmt::Display for UniquenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs = |p: &PhasePolynomial| {
            p.coefficients().iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(" ")
        };
        writeln!(f, "trials {}", self.trials)?;
        writeln!(f, "best_nonconstant_defect {:.6e}", self.best_defect)?;
        writeln!(f, "nonconstancy {:.6e}", self.best_nonconstancy)?;
        writeln!(f, "triple_defect {:.6e}", self.triple_defect)?;
        writeln!(f, "f {}", coeffs(&self.f))?;
        writeln!(f, "g {}", coeffs(&self.g))?;
        writeln!(f, "h {}", coeffs(&self.h))
    }
}

/// `‖e^{ih}ψ − e^{ig}ψ‖² + ‖e^{ih}ψ − e^{if}ψ‖²` with each polynomial applied
/// to the spin component along its frame axis.
pub fn triple_defect(psi: &PureState, frame: &Frame, f: &PhasePolynomial, g: &PhasePolynomial, h: &PhasePolynomial) -> f64 {
    let spin = psi.spin();
    let apply = |p: &PhasePolynomial, axis: &Axis| p.phase_operator(&rotation_to_axis(spin, axis)) * psi.amplitudes();
    let hv = apply(h, &frame.h_axis);
    (&hv - apply(g, &frame.g_axis)).norm_squared() + (&hv - apply(f, &frame.f_axis)).norm_squared()
}

/// `1 − |mean_j e^{iφ_j}|²`: zero exactly when all phases agree mod 2π.
pub fn nonconstancy(phases: &[f64]) -> f64 {
    let n = phases.len() as f64;
    let mean = phases.iter().fold(c(0.0, 0.0), |acc, &p| acc + c(p.cos(), p.sin())) / n;
    1.0 - mean.norm_sqr()
}

struct Probe {
    spin: SpinValue,
    psi: CVector,
    u_h: CMatrix,
    /// Eigenbases of the `g` and `f` axes with the target moduli of `ψ`.
    others: Vec<(CMatrix, Vec<f64>)>,
    nu_min: f64,
    penalty: f64,
}

impl Probe {
    fn h_values(free: &[f64]) -> Vec<f64> {
        std::iter::once(0.0).chain(free.iter().copied()).collect()
    }

    fn rotated(&self, h: &[f64]) -> CVector {
        let phases = CVector::from_iterator(h.len(), h.iter().map(|v| c(v.cos(), v.sin())));
        &self.u_h * phases.component_mul(&(self.u_h.adjoint() * &self.psi))
    }

    /// For fixed `h`, minimizing over `g` leaves `(|⟨k|φ⟩| − |⟨k|ψ⟩|)²`
    /// per eigenvector `k` of the `g` axis, since `g` can realize any phase
    /// at its `2s+1` eigenvalues; likewise for `f`.
    fn residuals(&self, free: &[f64]) -> DVector<f64> {
        let h = Self::h_values(free);
        let phi = self.rotated(&h);
        let d = self.spin.dim();
        let mut r = DVector::zeros(2 * d + 1);
        for (k, (u, target)) in self.others.iter().enumerate() {
            let proj = u.adjoint() * &phi;
            for j in 0..d {
                r[k * d + j] = proj[j].norm() - target[j];
            }
        }
        r[2 * d] = self.penalty.sqrt() * (self.nu_min - nonconstancy(&h)).max(0.0);
        r
    }

    fn polynomials(&self, free: &[f64]) -> Result<(PhasePolynomial, PhasePolynomial, PhasePolynomial)> {
        let h_vals = Self::h_values(free);
        let phi = self.rotated(&h_vals);
        let matching = |u: &CMatrix| -> Result<PhasePolynomial> {
            let a = u.adjoint() * &phi;
            let b = u.adjoint() * &self.psi;
            let vals: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| if y.norm() > 1e-14 { (x / y).arg() } else { 0.0 }).collect();
            PhasePolynomial::interpolate(self.spin, &vals)
        };
        let g = matching(&self.others[0].0)?;
        let f = matching(&self.others[1].0)?;
        Ok((f, g, PhasePolynomial::interpolate(self.spin, &h_vals)?))
    }
}

/// Searches for non-constant phase polynomials `(f, g, h)` with
/// `e^{if}ψ = e^{ig}ψ = e^{ih}ψ` from `trials` random starts and reports the
/// smallest defect found.
pub fn uniqueness_probe(psi: &PureState, opts: &UniquenessOptions) -> Result<UniquenessReport> {
    let spin = psi.spin();
    let d = spin.dim();
    let frame = opts.frame;
    let psi_v = psi.amplitudes().clone();
    let others = [frame.g_axis, frame.f_axis]
        .iter()
        .map(|axis| {
            let u = rotation_to_axis(spin, axis);
            let target = (u.adjoint() * &psi_v).iter().map(|z| z.norm()).collect();
            (u, target)
        })
        .collect();
    let probe = Probe {
        spin,
        psi: psi_v,
        u_h: rotation_to_axis(spin, &frame.h_axis),
        others,
        nu_min: opts.nu_min,
        penalty: opts.penalty,
    };
    let residuals = |x: &[f64]| probe.residuals(x);
    let eval = |x: &[f64]| (probe.residuals(x), numeric_jacobian(&residuals, x, 1e-7));
    let lm = LmOptions { max_iterations: 200, gradient_tol: 1e-12, residual_tol: 1e-14, step_tol: 1e-14 };
    let mut rng = rng_from_seed(opts.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..opts.trials.max(1) {
        let start: Vec<f64> = (1..d).map(|_| rng.random_range(-PI..PI)).collect();
        let res = levenberg_marquardt(eval, &start, &lm);
        let defect = res.residual * res.residual;
        if best.as_ref().is_none_or(|b| defect < b.0) {
            best = Some((defect, res.x));
        }
    }
    let (best_defect, x) = best.expect("at least one trial");
    let (f, g, h) = probe.polynomials(&x)?;
    let triple = triple_defect(psi, &frame, &f, &g, &h);
    Ok(UniquenessReport {
        trials: opts.trials.max(1),
        best_defect,
        best_nonconstancy: nonconstancy(&Probe::h_values(&x)),
        f,
        g,
        h,
        triple_defect: triple,
    })
}
