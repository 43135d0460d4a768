//! Unitary evolution and its description through quorum intensities alone.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::indirect::ReconMode;
use crate::linalg::{c, hermitian_eigen, hermiticity_defect, spectral_function, CMatrix, I};
use crate::measurement::{rotated_diagonal, sg_probabilities, Axis, IntensityTable, Provenance, QuorumSpec};
use crate::mixed::MixedReconstructor;
use crate::pure::reconstruct_pure;
use crate::spin::{rotation_to_axis, spin_operators, DensityMatrix, GenericOperator, PureState, SpinValue};

const HERMITEAN_TOL: f64 = 1e-12;

/// Largest per-axis normalization defect tolerated in a trajectory.
pub const TRAJECTORY_NORM_TOL: f64 = 1e-10;

/// Closure deviation accepted for exact data.
pub const CLOSURE_TOL: f64 = 1e-8;

/// A hermitean Hamiltonian with its spectral decomposition (ħ = 1).
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    spin: SpinValue,
    matrix: CMatrix,
    values: Vec<f64>,
    vectors: CMatrix,
}

impl Hamiltonian {
    pub fn new(spin: SpinValue, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != spin.dim() || matrix.ncols() != spin.dim() {
            return Err(Error::DimensionMismatch { expected: spin.dim(), found: matrix.nrows() });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITEAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let (values, vectors) = hermitian_eigen(&matrix);
        Ok(Hamiltonian { spin, matrix, values, vectors })
    }

    /// `ω (n·Ŝ)`.
    pub fn zeeman(spin: SpinValue, omega: f64, n: [f64; 3]) -> Result<Self> {
        Self::quadratic(spin, omega, n, 0.0)
    }

    /// `ω (n·Ŝ) + κ Ŝz²`.
    pub fn quadratic(spin: SpinValue, omega: f64, n: [f64; 3], kappa: f64) -> Result<Self> {
        let ops = spin_operators(spin);
        let m = ops.component(n).scale(omega) + (&ops.sz * &ops.sz).scale(kappa);
        Self::new(spin, m)
    }

    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues, descending.
    pub fn energies(&self) -> &[f64] {
        &self.values
    }

    /// `exp(−iHt)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        spectral_function(&self.values, &self.vectors, |e| (-I * e * t).exp())
    }

    /// Distinct positive level spacings `|E_i − E_j|`, ascending, merged
    /// within `tol`.
    pub fn spectral_gaps(&self, tol: f64) -> Vec<f64> {
        let mut gaps: Vec<f64> = Vec::new();
        for (i, a) in self.values.iter().enumerate() {
            for b in &self.values[i + 1..] {
                let g = (a - b).abs();
                if g > tol && gaps.iter().all(|x| (x - g).abs() > tol) {
                    gaps.push(g);
                }
            }
        }
        gaps.sort_by(f64::total_cmp);
        gaps
    }

    pub fn as_operator(&self) -> GenericOperator {
        GenericOperator::new(self.spin, self.matrix.clone()).expect("dimensions checked")
    }
}

/// Parsed `family:key=value,...` specification, e.g.
/// `zeeman:omega=1.0,axis=z,kappa=0.2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub omega: f64,
    pub axis: [f64; 3],
    pub kappa: f64,
}

impl HamiltonianSpec {
    pub fn build(&self, spin: SpinValue) -> Result<Hamiltonian> {
        Hamiltonian::quadratic(spin, self.omega, self.axis, self.kappa)
    }
}

fn parse_axis(text: &str) -> Result<[f64; 3]> {
    match text {
        "x" => Ok([1.0, 0.0, 0.0]),
        "y" => Ok([0.0, 1.0, 0.0]),
        "z" => Ok([0.0, 0.0, 1.0]),
        other => {
            let (t, p) = other
                .split_once('/')
                .ok_or_else(|| Error::InvalidParameter(format!("axis `{other}`: expected x, y, z or theta/phi")))?;
            let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad angle `{s}`")));
            Ok(Axis::new(parse(t)?, parse(p)?)?.unit_vector())
        }
    }
}

impl FromStr for HamiltonianSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        if family != "zeeman" && family != "quadratic" {
            return Err(Error::InvalidParameter(format!("unknown Hamiltonian family `{family}`")));
        }
        let mut spec = HamiltonianSpec { omega: 1.0, axis: [0.0, 0.0, 1.0], kappa: 0.0 };
        for kv in params.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{kv}`")))?;
            let number = || value.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number `{value}`")));
            match key {
                "omega" => spec.omega = number()?,
                "kappa" => spec.kappa = number()?,
                "axis" => spec.axis = parse_axis(value)?,
                other => return Err(Error::InvalidParameter(format!("unknown parameter `{other}`"))),
            }
        }
        Ok(spec)
    }
}

pub fn evolve_pure(psi: &PureState, h: &Hamiltonian, t: f64) -> Result<PureState> {
    check_spin(h, psi.spin())?;
    PureState::normalized(psi.spin(), h.propagator(t) * psi.amplitudes())
}

/// `ρ(t) = U ρ U†` with `U = exp(−iHt)`.
pub fn evolve_density(rho: &DensityMatrix, h: &Hamiltonian, t: f64) -> Result<DensityMatrix> {
    check_spin(h, rho.spin())?;
    Ok(rho.transformed(&h.propagator(t)))
}

fn check_spin(h: &Hamiltonian, spin: SpinValue) -> Result<()> {
    if h.spin != spin {
        return Err(Error::DimensionMismatch { expected: h.spin.dim(), found: spin.dim() });
    }
    Ok(())
}

/// `steps + 1` equally spaced times from `t0` to `t1`.
pub fn time_grid(t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(t1 > t0) {
        return Err(Error::InvalidParameter("need t1 > t0 and at least one step".into()));
    }
    let dt = (t1 - t0) / steps as f64;
    Ok((0..=steps).map(|i| if i == steps { t1 } else { t0 + i as f64 * dt }).collect())
}

/// Quorum intensities along a time grid.
#[derive(Debug, Clone)]
pub struct QuorumTrajectory {
    spin: SpinValue,
    quorum: QuorumSpec,
    times: Vec<f64>,
    /// Stacked intensities per time, axis-major.
    values: Vec<Vec<f64>>,
}

impl QuorumTrajectory {
    pub fn new(spin: SpinValue, quorum: QuorumSpec, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("times must be strictly increasing".into()));
        }
        if values.len() != times.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
        }
        let d = spin.dim();
        for row in &values {
            if row.len() != quorum.len() * d {
                return Err(Error::DimensionMismatch { expected: quorum.len() * d, found: row.len() });
            }
            for axis in row.chunks(d) {
                let defect = (axis.iter().sum::<f64>() - 1.0).abs();
                if defect > TRAJECTORY_NORM_TOL {
                    return Err(Error::InvalidProbabilities(format!("axis normalization defect {defect:.3e}")));
                }
            }
        }
        Ok(QuorumTrajectory { spin, quorum, times, values })
    }

    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn quorum(&self) -> &QuorumSpec {
        &self.quorum
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// `p_m^{(k)}(t_i)`.
    pub fn value(&self, i: usize, k: usize, j: usize) -> f64 {
        self.values[i][k * self.spin.dim() + j]
    }

    /// Time series of one outcome.
    pub fn series(&self, k: usize, j: usize) -> Vec<f64> {
        (0..self.times.len()).map(|i| self.value(i, k, j)).collect()
    }

    /// Intensity table at grid point `i`.
    pub fn table_at(&self, i: usize) -> Result<IntensityTable> {
        let d = self.spin.dim();
        let probs = self.values[i].chunks(d).map(<[f64]>::to_vec).collect();
        IntensityTable::from_raw(self.spin, self.quorum.axes().to_vec(), probs, Provenance::Exact)
    }

    /// Plot-ready columns `t k m p`.
    pub fn to_columns(&self) -> String {
        let d = self.spin.dim();
        let mut out = String::from("# t k m p\n");
        for (t, row) in self.times.iter().zip(&self.values) {
            for (idx, p) in row.iter().enumerate() {
                let (k, j) = (idx / d, idx % d);
                writeln!(out, "{t:.10e} {k} {} {p:.16e}", crate::spin::format_m(self.spin.two_m(j))).unwrap();
            }
        }
        out
    }
}

fn stacked_probabilities(rho: &CMatrix, rotations: &[CMatrix]) -> Vec<f64> {
    rotations.iter().flat_map(|u| rotated_diagonal(rho, u)).collect()
}

/// Exact evolution of `rho0` sampled on `times`.
pub fn quorum_trajectory(rho0: &DensityMatrix, h: &Hamiltonian, times: &[f64], quorum: &QuorumSpec) -> Result<QuorumTrajectory> {
    check_spin(h, rho0.spin())?;
    let spin = rho0.spin();
    let rotations: Vec<CMatrix> = quorum.axes().iter().map(|a| rotation_to_axis(spin, a)).collect();
    let values = times
        .iter()
        .map(|&t| Ok(stacked_probabilities(evolve_density(rho0, h, t)?.matrix(), &rotations)))
        .collect::<Result<Vec<_>>>()?;
    QuorumTrajectory::new(spin, quorum.clone(), times.to_vec(), values)
}

#[derive(Debug, Clone)]
pub struct ClosureReport {
    /// `max |p_pred(t_{i+1}) − p(t_{i+1})|` per step.
    pub step_deviations: Vec<f64>,
    pub max_deviation: f64,
}

impl ClosureReport {
    pub fn pass(&self) -> bool {
        self.max_deviation <= CLOSURE_TOL
    }
}

impl fmt::Display for ClosureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps {}", self.step_deviations.len())?;
        writeln!(f, "max_closure_deviation {:.6e}", self.max_deviation)?;
        writeln!(f, "closure {}", if self.pass() { "pass" } else { "fail" })
    }
}

/// Reconstructs the state from the quorum values at each `t_i`, propagates
/// it to `t_{i+1}` and compares the predicted quorum values with the
/// recorded ones.
pub fn closure_check(traj: &QuorumTrajectory, h: &Hamiltonian, mode: &ReconMode) -> Result<ClosureReport> {
    check_spin(h, traj.spin)?;
    let spin = traj.spin;
    let rotations: Vec<CMatrix> = traj.quorum.axes().iter().map(|a| rotation_to_axis(spin, a)).collect();
    let mixed = match mode {
        ReconMode::Mixed(_) => Some(MixedReconstructor::new(spin, &traj.quorum)?),
        ReconMode::Pure(_) => None,
    };
    let mut step_deviations = Vec::with_capacity(traj.times.len().saturating_sub(1));
    for i in 0..traj.times.len().saturating_sub(1) {
        let rho = match (mode, &mixed) {
            (ReconMode::Mixed(opts), Some(rec)) => rec.reconstruct_stacked(&traj.values[i], true, opts)?.rho_hat,
            (ReconMode::Pure(opts), _) => reconstruct_pure(&traj.table_at(i)?, opts)?.state.to_density(),
            _ => unreachable!("reconstructor built for mixed mode"),
        };
        let dt = traj.times[i + 1] - traj.times[i];
        let predicted = stacked_probabilities(evolve_density(&rho, h, dt)?.matrix(), &rotations);
        let dev = predicted.iter().zip(&traj.values[i + 1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        step_deviations.push(dev);
    }
    let max_deviation = step_deviations.iter().copied().fold(0.0, f64::max);
    Ok(ClosureReport { step_deviations, max_deviation })
}

#[derive(Debug, Clone)]
pub struct GeneratorReport {
    pub dt: f64,
    /// Central differences of the stacked intensities at `t = 0`.
    pub finite_difference: Vec<f64>,
    /// `Tr(ρ i[H, P])` for each outcome projector `P`.
    pub commutator: Vec<f64>,
    pub max_gap: f64,
}

impl fmt::Display for GeneratorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dt {:.3e}", self.dt)?;
        writeln!(f, "max_generator_gap {:.6e}", self.max_gap)
    }
}

/// Rates `d⟨P⟩/dt` of every quorum projector, by central difference and by
/// the commutator with `H`.
pub fn generator_probe(rho: &DensityMatrix, h: &Hamiltonian, quorum: &QuorumSpec, dt: f64) -> Result<GeneratorReport> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    check_spin(h, rho.spin())?;
    let spin = rho.spin();
    let rotations: Vec<CMatrix> = quorum.axes().iter().map(|a| rotation_to_axis(spin, a)).collect();
    let plus = stacked_probabilities(evolve_density(rho, h, dt)?.matrix(), &rotations);
    let minus = stacked_probabilities(evolve_density(rho, h, -dt)?.matrix(), &rotations);
    let finite_difference: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * dt)).collect();
    // Tr(ρ i[H, P]) = ⟨m,n| i[ρ, H] |m,n⟩
    let rate_op = (rho.matrix() * h.matrix() - h.matrix() * rho.matrix()) * I;
    let commutator = stacked_probabilities(&rate_op, &rotations);
    let max_gap = finite_difference.iter().zip(&commutator).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(GeneratorReport { dt, finite_difference, commutator, max_gap })
}

/// Frequencies (angular, ascending) of the `count` strongest peaks of the
/// mean-removed series sampled at spacing `dt`. Peaks are local maxima of
/// the power spectrum refined by parabolic interpolation.
pub fn dominant_frequencies(series: &[f64], dt: f64, count: usize) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<rustfft::num_complex::Complex64> = series
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            // Hann window limits leakage between nearby peaks
            let w = 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos();
            c((x - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf[..n / 2].iter().map(|z| z.norm_sqr()).collect();
    let mut peaks: Vec<(f64, f64)> = (1..power.len().saturating_sub(1))
        .filter(|&k| power[k] > power[k - 1] && power[k] >= power[k + 1])
        .map(|k| {
            let (a, b, g) = (power[k - 1].ln(), power[k].ln(), power[k + 1].ln());
            let denom = a - 2.0 * b + g;
            let shift = if denom.abs() > 0.0 { 0.5 * (a - g) / denom } else { 0.0 };
            (power[k], std::f64::consts::TAU * (k as f64 + shift) / (n as f64 * dt))
        })
        .collect();
    peaks.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut freqs: Vec<f64> = peaks.into_iter().take(count).map(|p| p.1).collect();
    freqs.sort_by(f64::total_cmp);
    freqs
}

/// Expectation value of the Hamiltonian.
pub fn energy(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64> {
    Ok(crate::spin::expectation(rho, &h.as_operator())?.re)
}

/// Intensities along `axis` after evolving `rho` for a time `t`.
pub fn intensities_at(rho: &DensityMatrix, h: &Hamiltonian, axis: &Axis, t: f64) -> Result<Vec<f64>> {
    sg_probabilities(&evolve_density(rho, h, t)?, axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{cone_axes, default_tripod};
    use crate::mixed::MixedOptions;
    use crate::pure::PureOptions;
    use crate::spin::{random_density, random_pure};

    const Z: [f64; 3] = [0.0, 0.0, 1.0];

    #[test]
    fn eigenstate_is_stationary() {
        let spin = SpinValue::ONE;
        let h = Hamiltonian::zeeman(spin, 1.3, Z).unwrap();
        let up = PureState::basis(spin, 2).unwrap().to_density();
        for t in [0.5, 3.0, 10.0] {
            let p = intensities_at(&up, &h, &Axis::z(), t).unwrap();
            assert!((p[0] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn larmor_half_turn() {
        let spin = SpinValue::HALF;
        let omega = 2.0;
        let h = Hamiltonian::zeeman(spin, omega, Z).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let up_x = PureState::new(spin, nalgebra::DVector::from_vec(vec![c(r, 0.0), c(r, 0.0)])).unwrap();
        let down_x = PureState::new(spin, nalgebra::DVector::from_vec(vec![c(r, 0.0), c(-r, 0.0)])).unwrap();
        let out = evolve_pure(&up_x, &h, std::f64::consts::PI / omega).unwrap();
        assert!(out.fidelity(&down_x) > 1.0 - 1e-14);
    }

    #[test]
    fn larmor_closed_form_on_x() {
        let spin = SpinValue::HALF;
        let omega = 0.7;
        let h = Hamiltonian::zeeman(spin, omega, Z).unwrap();
        let rho = random_density(spin, 2, 2).unwrap();
        let ops = spin_operators(spin);
        let sx0 = crate::spin::expectation(&rho, &GenericOperator::new(spin, ops.sx.clone()).unwrap()).unwrap().re;
        let sy0 = crate::spin::expectation(&rho, &GenericOperator::new(spin, ops.sy.clone()).unwrap()).unwrap().re;
        let q = QuorumSpec::explicit(vec![Axis::x()]).unwrap();
        let times = time_grid(0.0, 20.0, 200).unwrap();
        let traj = quorum_trajectory(&rho, &h, &times, &q).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let expected = 0.5 + sx0 * (omega * t).cos() - sy0 * (omega * t).sin();
            assert!((traj.value(i, 0, 0) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn conservation_laws() {
        for two_s in 1..=4 {
            let spin = SpinValue::from_two_s(two_s);
            let h = Hamiltonian::quadratic(spin, 1.0, Axis::new(0.4, 1.0).unwrap().unit_vector(), 0.3).unwrap();
            let rho = random_density(spin, 4, spin.dim()).unwrap();
            let psi = random_pure(spin, 4);
            let (e0, p0) = (energy(&rho, &h).unwrap(), rho.purity());
            for t in [0.1, 7.0, 100.0] {
                let r = evolve_density(&rho, &h, t).unwrap();
                assert!((r.trace().re - 1.0).abs() < 1e-12);
                assert!((r.purity() - p0).abs() < 1e-12);
                assert!((energy(&r, &h).unwrap() - e0).abs() < 1e-12);
                let v = h.propagator(t) * psi.amplitudes();
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn z_axis_constant_under_z_field() {
        let spin = SpinValue::from_two_s(3);
        let h = Hamiltonian::zeeman(spin, 1.0, Z).unwrap();
        let rho = random_density(spin, 1, 4).unwrap();
        let q = QuorumSpec::explicit(vec![Axis::z()]).unwrap();
        let traj = quorum_trajectory(&rho, &h, &time_grid(0.0, 10.0, 50).unwrap(), &q).unwrap();
        for row in traj.values() {
            for (a, b) in row.iter().zip(&traj.values()[0]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closure_on_injective_quorum() {
        let spin = SpinValue::HALF;
        let h = Hamiltonian::zeeman(spin, 1.0, Z).unwrap();
        let rho = random_density(spin, 3, 2).unwrap();
        let traj = quorum_trajectory(&rho, &h, &time_grid(0.0, 10.0, 100).unwrap(), &default_tripod()).unwrap();
        let r = closure_check(&traj, &h, &ReconMode::default()).unwrap();
        assert_eq!(r.step_deviations.len(), 100);
        assert!(r.pass(), "{}", r.max_deviation);
    }

    #[test]
    fn closure_in_pure_mode() {
        let spin = SpinValue::ONE;
        let h = Hamiltonian::quadratic(spin, 1.0, [1.0, 0.0, 0.0], 0.4).unwrap();
        let rho = random_pure(spin, 2).to_density();
        let traj = quorum_trajectory(&rho, &h, &time_grid(0.0, 5.0, 20).unwrap(), &default_tripod()).unwrap();
        let r = closure_check(&traj, &h, &ReconMode::Pure(PureOptions::default())).unwrap();
        assert!(r.pass(), "{}", r.max_deviation);
    }

    #[test]
    fn maximally_mixed_trajectory_is_constant() {
        let spin = SpinValue::ONE;
        let h = Hamiltonian::quadratic(spin, 1.0, [1.0, 0.0, 0.0], 0.2).unwrap();
        let q = cone_axes(5, 1.0).unwrap();
        let traj = quorum_trajectory(&DensityMatrix::maximally_mixed(spin), &h, &time_grid(0.0, 3.0, 10).unwrap(), &q).unwrap();
        assert!(traj.values().iter().flatten().all(|p| (p - 1.0 / 3.0).abs() < 1e-14));
        assert!(closure_check(&traj, &h, &ReconMode::default()).unwrap().max_deviation < 1e-14);
    }

    #[test]
    fn deficient_quorum_fails_immediately() {
        let spin = SpinValue::ONE;
        let h = Hamiltonian::zeeman(spin, 1.0, Z).unwrap();
        let q = cone_axes(3, 1.0).unwrap();
        let traj = quorum_trajectory(&random_density(spin, 1, 3).unwrap(), &h, &time_grid(0.0, 1.0, 5).unwrap(), &q).unwrap();
        assert!(matches!(
            closure_check(&traj, &h, &ReconMode::Mixed(MixedOptions::default())),
            Err(Error::NotInjective { .. })
        ));
    }

    #[test]
    fn generator_matches_commutator() {
        let spin = SpinValue::ONE;
        let h = Hamiltonian::quadratic(spin, 1.0, Axis::new(1.0, 0.3).unwrap().unit_vector(), 0.5).unwrap();
        let rho = random_density(spin, 7, 3).unwrap();
        let q = cone_axes(5, 0.9).unwrap();
        let coarse = generator_probe(&rho, &h, &q, 1e-3).unwrap();
        let fine = generator_probe(&rho, &h, &q, 5e-4).unwrap();
        assert!(coarse.max_gap <= 1e-6);
        let ratio = coarse.max_gap / fine.max_gap;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn stationary_state_has_zero_rates() {
        let spin = SpinValue::ONE;
        let h = Hamiltonian::quadratic(spin, 1.0, Z, 0.7).unwrap();
        let rho = PureState::basis(spin, 0).unwrap().to_density();
        let r = generator_probe(&rho, &h, &cone_axes(5, 0.9).unwrap(), 1e-3).unwrap();
        assert!(r.finite_difference.iter().chain(&r.commutator).all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn larmor_rate_closed_form() {
        // d/dt p_+^{(x)} = −ω(⟨Ŝx⟩₀ sin ωt + ⟨Ŝy⟩₀ cos ωt), at t = 0: −ω⟨Ŝy⟩₀
        let spin = SpinValue::HALF;
        let omega = 1.7;
        let h = Hamiltonian::zeeman(spin, omega, Z).unwrap();
        let rho = random_density(spin, 5, 2).unwrap();
        let sy0 = crate::spin::expectation(&rho, &GenericOperator::new(spin, spin_operators(spin).sy).unwrap()).unwrap().re;
        let r = generator_probe(&rho, &h, &QuorumSpec::explicit(vec![Axis::x()]).unwrap(), 1e-3).unwrap();
        assert!((r.commutator[0] + omega * sy0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_of_x_intensities_matches_level_gaps() {
        let spin = SpinValue::ONE;
        let h = Hamiltonian::quadratic(spin, 1.0, Z, 0.35).unwrap();
        // levels ω m + κ m²: gaps 1 − κ, 1 + κ, 2
        let gaps = h.spectral_gaps(1e-9);
        assert_eq!(gaps.len(), 3);
        let rho = random_density(spin, 9, 3).unwrap();
        let q = QuorumSpec::explicit(vec![Axis::x()]).unwrap();
        let (n, dt) = (4096, 0.05);
        let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let traj = quorum_trajectory(&rho, &h, &times, &q).unwrap();
        let freqs = dominant_frequencies(&traj.series(0, 0), dt, 3);
        let resolution = std::f64::consts::TAU / (n as f64 * dt);
        for (f, g) in freqs.iter().zip(&gaps) {
            assert!((f - g).abs() < 0.5 * resolution, "{freqs:?} vs {gaps:?}");
        }
    }

    #[test]
    fn hamiltonian_spec_parsing() {
        let s: HamiltonianSpec = "zeeman:omega=2.0,axis=x,kappa=0.2".parse().unwrap();
        assert_eq!(s, HamiltonianSpec { omega: 2.0, axis: [1.0, 0.0, 0.0], kappa: 0.2 });
        let s: HamiltonianSpec = "quadratic:axis=1.5707963267948966/0".parse().unwrap();
        assert!((s.axis[0] - 1.0).abs() < 1e-15);
        assert!("zeeman:omega=x".parse::<HamiltonianSpec>().is_err());
        assert!("linear".parse::<HamiltonianSpec>().is_err());
    }

    #[test]
    fn non_hermitean_rejected() {
        let spin = SpinValue::HALF;
        let m = spin_operators(spin).raising();
        assert!(matches!(Hamiltonian::new(spin, m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn times_must_increase() {
        let q = default_tripod();
        let v = vec![vec![0.5; 6]; 2];
        assert!(QuorumTrajectory::new(SpinValue::HALF, q, vec![1.0, 1.0], v).is_err());
    }
}
