//! Grid wave functions for the particle Pauli problem: an odd-parity state
//! and its complex conjugate share position and momentum densities.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fmt::Write as _;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{c, C64};

/// Parity defect accepted as odd.
pub const PARITY_TOL: f64 = 1e-12;

/// `|⟨ψ*|ψ⟩|` below `1 − INDEPENDENCE_TOL` means distinct rays.
pub const INDEPENDENCE_TOL: f64 = 1e-9;

/// Values on the cell-centered grid `x_j = −L + (j + ½)·dx`, `dx = 2L/N`,
/// which is mirror symmetric: `x_{N−1−j} = −x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    half_width: f64,
    dx: f64,
    x: Vec<f64>,
    values: Vec<C64>,
}

fn grid(n: usize, half_width: f64) -> Result<(f64, Vec<f64>)> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("N = {n} must be even and at least 2")));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidGrid(format!("L = {half_width} must be positive")));
    }
    let dx = 2.0 * half_width / n as f64;
    let mut x = vec![0.0; n];
    for j in 0..n / 2 {
        let v = -half_width + (j as f64 + 0.5) * dx;
        x[j] = v;
        x[n - 1 - j] = -v;
    }
    Ok((dx, x))
}

impl GridWavefunction {
    /// Samples `f` on the grid and normalizes `Σ|ψ|²dx = 1`.
    pub fn from_fn<F: Fn(f64) -> C64>(n: usize, half_width: f64, f: F) -> Result<Self> {
        let (dx, x) = grid(n, half_width)?;
        let values = x.iter().map(|&v| f(v)).collect();
        Self::normalized(half_width, dx, x, values)
    }

    /// Samples an odd function on the negative half and mirrors it, so
    /// parity holds exactly on the grid.
    pub fn odd_from_fn<F: Fn(f64) -> C64>(n: usize, half_width: f64, f: F) -> Result<Self> {
        let (dx, x) = grid(n, half_width)?;
        let mut values = vec![c(0.0, 0.0); n];
        for j in 0..n / 2 {
            let v = f(x[j]);
            values[j] = v;
            values[n - 1 - j] = -v;
        }
        Self::normalized(half_width, dx, x, values)
    }

    fn normalized(half_width: f64, dx: f64, x: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        let norm = (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("wave function vanishes on the grid".into()));
        }
        let values = values.into_iter().map(|z| z / norm).collect();
        Ok(GridWavefunction { half_width, dx, x, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn conjugate(&self) -> GridWavefunction {
        GridWavefunction { values: self.values.iter().map(|z| z.conj()).collect(), ..self.clone() }
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx
    }

    /// `⟨self|other⟩ = Σ conj(ψ_j) φ_j dx`.
    pub fn inner(&self, other: &GridWavefunction) -> C64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<C64>() * self.dx
    }

    /// `max_j |ψ(x_j) + ψ(−x_j)|`.
    pub fn parity_defect(&self) -> f64 {
        let n = self.len();
        (0..n).map(|j| (self.values[j] + self.values[n - 1 - j]).norm()).fold(0.0, f64::max)
    }

    pub fn position_density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Centered momenta `p_k = 2πk/(N·dx)`, `k = −N/2, …, N/2 − 1`.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.len() as i64;
        let dp = TAU / (n as f64 * self.dx);
        (-n / 2..n / 2).map(|k| k as f64 * dp).collect()
    }

    /// `ψ̂(p_k) = dx/√(2π) Σ_j ψ_j e^{−i p_k x_j}` on [`momenta`](Self::momenta),
    /// computed by FFT.
    pub fn momentum_amplitudes(&self) -> Vec<C64> {
        let n = self.len();
        let mut buf = self.values.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = self.dx / (2.0 * PI).sqrt();
        let x0 = self.x[0];
        self.momenta()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let q = (i + n / 2) % n;
                buf[q] * c((p * x0).cos(), -(p * x0).sin()) * scale
            })
            .collect()
    }

    pub fn momentum_density(&self) -> Vec<f64> {
        self.momentum_amplitudes().iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn dp(&self) -> f64 {
        TAU / (self.len() as f64 * self.dx)
    }

    /// Determinant of the Gram matrix of the normalized real and imaginary
    /// parts; zero when they are linearly dependent.
    pub fn gram_determinant(&self) -> f64 {
        let re: Vec<f64> = self.values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.values.iter().map(|z| z.im).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (rr, ii, ri) = (dot(&re, &re), dot(&im, &im), dot(&re, &im));
        if rr == 0.0 || ii == 0.0 {
            return 0.0;
        }
        1.0 - ri * ri / (rr * ii)
    }

    /// `⟨x⟩`.
    pub fn mean_x(&self) -> f64 {
        self.x.iter().zip(&self.values).map(|(x, z)| x * z.norm_sqr()).sum::<f64>() * self.dx
    }

    /// `⟨p⟩` from the momentum density.
    pub fn mean_p(&self) -> f64 {
        self.momenta().iter().zip(self.momentum_density()).map(|(p, w)| p * w).sum::<f64>() * self.dp()
    }
}

/// `ψ(x) ∝ (x + i x³) e^{−x²/2}`: odd, with linearly independent real and
/// imaginary parts.
pub fn make_counterexample(n: usize, half_width: f64) -> Result<GridWavefunction> {
    GridWavefunction::odd_from_fn(n, half_width, |x| c(x, x * x * x) * (-0.5 * x * x).exp())
}

#[derive(Debug, Clone)]
pub struct PartnerCheck {
    pub position_gap: f64,
    pub momentum_gap: f64,
    /// `|Σ|ψ̂|²dp − Σ|ψ|²dx|`.
    pub parseval_defect: f64,
    /// `|⟨ψ*|ψ⟩|`.
    pub overlap: f64,
    pub gram_determinant: f64,
    /// `ψ*` is a different ray from `ψ`.
    pub independent: bool,
    pub x: Vec<f64>,
    pub position: Vec<f64>,
    pub position_partner: Vec<f64>,
    pub p: Vec<f64>,
    pub momentum: Vec<f64>,
    pub momentum_partner: Vec<f64>,
}

impl PartnerCheck {
    /// Plot-ready `x |ψ|² |ψ*|²` and `p |ψ̂|² |ψ̂*|²` tables.
    pub fn density_tables(&self) -> String {
        let mut out = String::from("# x density partner_density\n");
        for ((x, a), b) in self.x.iter().zip(&self.position).zip(&self.position_partner) {
            writeln!(out, "{x:.10e} {a:.16e} {b:.16e}").unwrap();
        }
        out.push_str("\n# p density partner_density\n");
        for ((p, a), b) in self.p.iter().zip(&self.momentum).zip(&self.momentum_partner) {
            writeln!(out, "{p:.10e} {a:.16e} {b:.16e}").unwrap();
        }
        out
    }
}

impl fmt::Display for PartnerCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "grid_points {}", self.x.len())?;
        writeln!(f, "max_position_density_gap {:.3e}", self.position_gap)?;
        writeln!(f, "max_momentum_density_gap {:.3e}", self.momentum_gap)?;
        writeln!(f, "parseval_defect {:.3e}", self.parseval_defect)?;
        writeln!(f, "overlap_with_conjugate {:.12}", self.overlap)?;
        writeln!(f, "gram_determinant {:.12}", self.gram_determinant)?;
        writeln!(f, "conjugate_is_distinct {}", if self.independent { "yes" } else { "no (degenerate)" })
    }
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Compares the position and momentum densities of an odd `ψ` with those
/// of `ψ*`.
pub fn pauli_partner_check(psi: &GridWavefunction) -> Result<PartnerCheck> {
    let defect = psi.parity_defect();
    if defect > PARITY_TOL {
        return Err(Error::NotOddParity { defect });
    }
    let partner = psi.conjugate();
    let position = psi.position_density();
    let position_partner = partner.position_density();
    let momentum = psi.momentum_density();
    let momentum_partner = partner.momentum_density();
    let parseval_defect = (momentum.iter().sum::<f64>() * psi.dp() - psi.norm_squared()).abs();
    let overlap = partner.inner(psi).norm();
    Ok(PartnerCheck {
        position_gap: max_gap(&position, &position_partner),
        momentum_gap: max_gap(&momentum, &momentum_partner),
        parseval_defect,
        overlap,
        gram_determinant: psi.gram_determinant(),
        independent: overlap < 1.0 - INDEPENDENCE_TOL,
        x: psi.x().to_vec(),
        position,
        position_partner,
        p: psi.momenta(),
        momentum,
        momentum_partner,
    })
}

/// `α = √(mω/2ħ)⟨x⟩ + i⟨p⟩/√(2mωħ)`.
pub fn coherent_alpha(mean_x: f64, mean_p: f64, mass: f64, omega: f64, hbar: f64) -> Result<C64> {
    if !(mass > 0.0 && omega > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidParameter("mass, omega and hbar must be positive".into()));
    }
    Ok(c((mass * omega / (2.0 * hbar)).sqrt() * mean_x, mean_p / (2.0 * mass * omega * hbar).sqrt()))
}

/// Oscillator coherent state (`m = ω = ħ = 1`) with `⟨x⟩ = √2 Re α`,
/// `⟨p⟩ = √2 Im α`.
pub fn coherent_state(n: usize, half_width: f64, alpha: C64) -> Result<GridWavefunction> {
    let (x0, p0) = (2f64.sqrt() * alpha.re, 2f64.sqrt() * alpha.im);
    GridWavefunction::from_fn(n, half_width, |x| {
        let env = (-0.5 * (x - x0).powi(2)).exp();
        c(env * (p0 * x).cos(), env * (p0 * x).sin())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_mirror_symmetric() {
        let (dx, x) = grid(8, 2.0).unwrap();
        assert_eq!(dx, 0.5);
        assert_eq!(x[0], -1.75);
        for j in 0..8 {
            assert_eq!(x[j], -x[7 - j]);
        }
        assert!(grid(7, 1.0).is_err());
        assert!(grid(8, 0.0).is_err());
    }

    #[test]
    fn counterexample_properties() {
        let psi = make_counterexample(256, 10.0).unwrap();
        assert_eq!(psi.parity_defect(), 0.0);
        assert!((psi.norm_squared() - 1.0).abs() < 1e-12);
        assert!(psi.gram_determinant() > 1e-6);
        let r = pauli_partner_check(&psi).unwrap();
        assert!(r.position_gap <= 1e-12);
        assert!(r.momentum_gap <= 1e-10);
        assert!(r.parseval_defect <= 1e-10);
        assert!(r.independent);
    }

    #[test]
    fn momentum_transform_of_gaussian() {
        // e^{−x²/2} is its own transform
        let psi = GridWavefunction::from_fn(256, 12.0, |x| c((-0.5 * x * x).exp(), 0.0)).unwrap();
        let amp = psi.momentum_amplitudes();
        let norm = PI.powf(-0.25);
        for (p, a) in psi.momenta().iter().zip(&amp) {
            assert!((a - c(norm * (-0.5 * p * p).exp(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn real_odd_state_is_degenerate() {
        let psi = GridWavefunction::odd_from_fn(128, 10.0, |x| c(x * (-0.5 * x * x).exp(), 0.0)).unwrap();
        let r = pauli_partner_check(&psi).unwrap();
        assert!(!r.independent);
        assert!(r.gram_determinant == 0.0);
        assert!(r.momentum_gap < 1e-14);
    }

    #[test]
    fn even_state_rejected() {
        let psi = GridWavefunction::from_fn(128, 10.0, |x| c((-0.5 * x * x).exp(), x * x * (-0.5 * x * x).exp())).unwrap();
        assert!(matches!(pauli_partner_check(&psi), Err(Error::NotOddParity { .. })));
    }

    #[test]
    fn coherent_alpha_substitutions() {
        let a = coherent_alpha(2f64.sqrt(), 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((a - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(coherent_alpha(0.0, 0.0, 1.0, 1.0, 1.0).unwrap(), c(0.0, 0.0));
        let a = coherent_alpha(1.0, 1.0, 2.0, 0.5, 1.0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a - c(r, r)).norm() < 1e-15);
        assert!(coherent_alpha(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn coherent_state_moments_give_alpha() {
        let alpha = c(0.8, -0.5);
        let psi = coherent_state(512, 15.0, alpha).unwrap();
        let a = coherent_alpha(psi.mean_x(), psi.mean_p(), 1.0, 1.0, 1.0).unwrap();
        assert!((a - alpha).norm() < 1e-10);
    }
}
