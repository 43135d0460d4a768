//! Expectation values of arbitrary operators from quorum data, and the
//! held-out-axis consistency test.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::measurement::{
    axis_rng, measure_exact, measure_sampled, multinomial_counts, sg_probabilities, Axis, IntensityTable, QuorumSpec,
    NORMALIZATION_TOL,
};
use crate::mixed::{build_map, MixedOptions, MixedReconstructor, ReconMethod, ReconResult};
use crate::pure::{reconstruct_pure, PureOptions};
use crate::spin::{expectation, random_operator, spin_operators, DensityMatrix, GenericOperator, SpinValue};

/// Holdout axes closer than this to a quorum axis count as members.
pub const HOLDOUT_MIN_ANGLE: f64 = 1e-6;

/// Sampled-mode pass threshold on `|z|`.
pub const Z_THRESHOLD: f64 = 4.0;

/// Exact-mode pass threshold on `max |Δp|`.
pub const EXACT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub enum ReconMode {
    Mixed(MixedOptions),
    /// Three-axis pure-state retrieval; the data must come from a pure state.
    Pure(PureOptions),
}

impl Default for ReconMode {
    fn default() -> Self {
        ReconMode::Mixed(MixedOptions::default())
    }
}

/// Reconstructs the state behind `table` in the requested mode.
pub fn reconstruct(table: &IntensityTable, quorum: &QuorumSpec, mode: &ReconMode) -> Result<ReconResult> {
    match mode {
        ReconMode::Mixed(opts) => MixedReconstructor::new(table.spin(), quorum)?.reconstruct(table, opts),
        ReconMode::Pure(opts) => {
            let fit = reconstruct_pure(table, opts)?;
            Ok(ReconResult {
                rho_hat: fit.state.to_density(),
                residual: fit.residual,
                injective: true,
                method: ReconMethod::PurePhaseRetrieval,
                diagnostics: None,
                projected: false,
                min_eigenvalue: 0.0,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct IndirectResult {
    pub value: C64,
    pub rho_source: ReconResult,
    pub quorum: QuorumSpec,
}

/// `Tr(ρ̂ O)` with `ρ̂` reconstructed from `table`; `O` need not be hermitean.
pub fn indirect_expectation(
    table: &IntensityTable,
    quorum: &QuorumSpec,
    op: &GenericOperator,
    mode: &ReconMode,
) -> Result<IndirectResult> {
    let rho_source = reconstruct(table, quorum, mode)?;
    let value = expectation(&rho_source.rho_hat, op)?;
    Ok(IndirectResult { value, rho_source, quorum: quorum.clone() })
}

/// Named operators exercised by the indirect-measurement checks: ladder and
/// component operators, powers `(n·Ŝ)^k` along fixed axes, non-hermitean
/// products, and seeded random matrices.
pub fn operator_battery(spin: SpinValue, seed: u64) -> Vec<(String, GenericOperator)> {
    let ops = spin_operators(spin);
    let wrap = |m: CMatrix| GenericOperator::new(spin, m).expect("square operator of matching size");
    let mut battery = vec![
        ("identity".to_string(), GenericOperator::identity(spin)),
        ("sx".to_string(), wrap(ops.sx.clone())),
        ("sy".to_string(), wrap(ops.sy.clone())),
        ("sz".to_string(), wrap(ops.sz.clone())),
        ("s+".to_string(), wrap(ops.raising())),
        ("s-".to_string(), wrap(ops.lowering())),
        ("s+^2".to_string(), wrap(ops.raising() * ops.raising())),
        ("sx*sy".to_string(), wrap(&ops.sx * &ops.sy)),
        ("sz*s+".to_string(), wrap(&ops.sz * ops.raising())),
    ];
    let directions = [
        ("n1", Axis::new(0.7, 0.4).expect("valid angles")),
        ("n2", Axis::new(2.1, 3.9).expect("valid angles")),
    ];
    for (name, axis) in directions {
        let sn = ops.component(axis.unit_vector());
        let mut power = CMatrix::identity(spin.dim(), spin.dim());
        for k in 1..=3 {
            power = &power * &sn;
            battery.push((format!("s_{name}^{k}"), wrap(power.clone())));
        }
    }
    for j in 0..4 {
        battery.push((format!("random_hermitean_{j}"), random_operator(spin, seed.wrapping_add(2 * j), true)));
        battery.push((format!("random_general_{j}"), random_operator(spin, seed.wrapping_add(2 * j + 1), false)));
    }
    battery
}

/// Largest `|Tr(ρ̂O) − Tr(ρO)|` over a battery.
pub fn battery_max_error(rho: &DensityMatrix, rho_hat: &DensityMatrix, battery: &[(String, GenericOperator)]) -> Result<f64> {
    battery.iter().try_fold(0.0f64, |acc, (_, op)| {
        Ok(acc.max((expectation(rho_hat, op)? - expectation(rho, op)?).norm()))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsistencyMode {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub mode: ConsistencyMode,
    pub holdout: Axis,
    /// Holdout intensities measured directly.
    pub direct: Vec<f64>,
    /// Holdout intensities predicted from the quorum reconstruction.
    pub predicted: Vec<f64>,
    pub max_abs_diff: f64,
    /// Per-outcome `(direct − predicted)/σ` (sampled mode).
    pub z_scores: Option<Vec<f64>>,
    /// Largest quorum-fit residual in units of its binomial error (sampled mode).
    pub fit_z: Option<f64>,
    /// Largest per-axis normalization defect of the quorum table.
    pub normalization_defect: f64,
    pub pass: bool,
}

impl ConsistencyReport {
    pub fn max_abs_z(&self) -> Option<f64> {
        self.z_scores.as_ref().map(|z| z.iter().fold(0.0f64, |a, &b| a.max(b.abs())))
    }
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            ConsistencyMode::Exact => writeln!(f, "mode exact")?,
            ConsistencyMode::Sampled { shots, seed } => writeln!(f, "mode sampled shots {shots} seed {seed}")?,
        }
        writeln!(f, "holdout {:.12} {:.12}", self.holdout.theta(), self.holdout.phi())?;
        writeln!(f, "# j direct predicted z")?;
        for (j, (d, p)) in self.direct.iter().zip(&self.predicted).enumerate() {
            let z = self.z_scores.as_ref().map_or("-".to_string(), |z| format!("{:.4}", z[j]));
            writeln!(f, "{j} {d:.12e} {p:.12e} {z}")?;
        }
        writeln!(f, "max_abs_diff {:.6e}", self.max_abs_diff)?;
        if let Some(z) = self.max_abs_z() {
            writeln!(f, "max_abs_z {z:.4}")?;
        }
        if let Some(z) = self.fit_z {
            writeln!(f, "fit_max_abs_z {z:.4}")?;
        }
        writeln!(f, "normalization_defect {:.3e}", self.normalization_defect)?;
        writeln!(f, "verdict {}", if self.pass { "pass" } else { "fail" })
    }
}

fn check_holdout(quorum: &QuorumSpec, holdout: &Axis) -> Result<()> {
    let distance = quorum.min_angle_to(holdout);
    if distance <= HOLDOUT_MIN_ANGLE {
        return Err(Error::HoldoutInQuorum { distance });
    }
    Ok(())
}

/// Compares the held-out axis measured directly with its prediction from
/// the quorum data alone. In sampled mode the holdout is drawn from its own
/// stream (index `quorum.len()`) of the same seed.
pub fn consistency_test(
    rho_true: &DensityMatrix,
    quorum: &QuorumSpec,
    holdout: &Axis,
    mode: ConsistencyMode,
) -> Result<ConsistencyReport> {
    check_holdout(quorum, holdout)?;
    match mode {
        ConsistencyMode::Exact => {
            let table = measure_exact(rho_true, quorum)?;
            let direct = sg_probabilities(rho_true, holdout)?;
            consistency_from_tables(&table, quorum, holdout, &direct, mode)
        }
        ConsistencyMode::Sampled { shots, seed } => {
            let table = measure_sampled(rho_true, quorum, shots, seed)?;
            let p = sg_probabilities(rho_true, holdout)?;
            let counts = multinomial_counts(&p, shots, &mut axis_rng(seed, quorum.len()));
            let direct: Vec<f64> = counts.iter().map(|&n| n as f64 / shots as f64).collect();
            consistency_from_tables(&table, quorum, holdout, &direct, mode)
        }
    }
}

/// Consistency check on given data: a quorum table (possibly perturbed) and
/// the directly measured holdout frequencies.
pub fn consistency_from_tables(
    table: &IntensityTable,
    quorum: &QuorumSpec,
    holdout: &Axis,
    direct: &[f64],
    mode: ConsistencyMode,
) -> Result<ConsistencyReport> {
    check_holdout(quorum, holdout)?;
    let rec = MixedReconstructor::new(table.spin(), quorum)?;
    let normalization_defect = table
        .all_probabilities()
        .iter()
        .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let opts = MixedOptions::default();
    let y = table.stacked();
    let result = rec.reconstruct_stacked(&y, mode == ConsistencyMode::Exact, &opts)?;
    let predicted = sg_probabilities(&result.rho_hat, holdout)?;
    let max_abs_diff = direct.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let (z_scores, fit_z, pass) = match mode {
        ConsistencyMode::Exact => (None, None, max_abs_diff <= EXACT_TOL && normalization_defect <= NORMALIZATION_TOL),
        ConsistencyMode::Sampled { shots, .. } => {
            let n = shots as f64;
            let z = holdout_z_scores(&rec, holdout, &y, direct, &predicted, n)?;
            let fit = fit_z_score(&rec, &result, &y, n);
            let ok = z.iter().all(|v| v.abs() <= Z_THRESHOLD)
                && fit <= Z_THRESHOLD
                && normalization_defect <= NORMALIZATION_TOL;
            (Some(z), Some(fit), ok)
        }
    };
    Ok(ConsistencyReport {
        mode,
        holdout: *holdout,
        direct: direct.to_vec(),
        predicted,
        max_abs_diff,
        z_scores,
        fit_z,
        normalization_defect,
        pass,
    })
}

/// Binomial error of each outcome, floored at half a count.
fn binomial_se(p: f64, n: f64) -> f64 {
    (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n).sqrt().max(0.5 / n)
}

/// `z` per holdout outcome: the direct frequency's binomial variance plus
/// the variance of the linear prediction propagated from the multinomial
/// covariance of the quorum data.
fn holdout_z_scores(
    rec: &MixedReconstructor,
    holdout: &Axis,
    y: &[f64],
    direct: &[f64],
    predicted: &[f64],
    n: f64,
) -> Result<Vec<f64>> {
    let spin = rec.map().spin();
    let d = spin.dim();
    let holdout_map = build_map(spin, &QuorumSpec::explicit(vec![*holdout])?)?;
    // prediction = H_T · pinv · y + const, with H_T the traceless block
    let sensitivity = holdout_map.traceless_block() * rec.pseudo_inverse();
    let axes = y.len() / d;
    let mut z = Vec::with_capacity(d);
    for m in 0..d {
        let row = sensitivity.row(m);
        let mut var_pred = 0.0;
        for k in 0..axes {
            let p = &y[k * d..(k + 1) * d];
            // multinomial covariance (diag(p) − p pᵀ)/n of axis k
            let a: Vec<f64> = (0..d).map(|j| row[k * d + j]).collect();
            let mean: f64 = a.iter().zip(p).map(|(ai, pi)| ai * pi).sum();
            var_pred += a.iter().zip(p).map(|(ai, pi)| pi * (ai - mean).powi(2)).sum::<f64>() / n;
        }
        let se = (binomial_se(predicted[m], n).powi(2) + var_pred).sqrt();
        z.push((direct[m] - predicted[m]) / se);
    }
    Ok(z)
}

/// Largest `|y − Mĉ|` over the quorum entries in units of binomial error.
fn fit_z_score(rec: &MixedReconstructor, result: &ReconResult, y: &[f64], n: f64) -> f64 {
    let coords = rec.map().basis().coords(result.rho_hat.matrix());
    let fitted = rec.map().apply(&coords);
    y.iter()
        .zip(&fitted)
        .map(|(obs, fit)| (obs - fit).abs() / binomial_se(*fit, n))
        .fold(0.0, f64::max)
}

/// Copy of `table` with `delta` added to one entry; rows are left
/// unnormalized unless `renormalize` is set.
pub fn corrupt_entry(table: &IntensityTable, axis: usize, outcome: usize, delta: f64, renormalize: bool) -> Result<IntensityTable> {
    let mut probs = table.all_probabilities().to_vec();
    let row = probs
        .get_mut(axis)
        .ok_or_else(|| Error::InvalidParameter(format!("axis {axis} out of range")))?;
    let entry = row
        .get_mut(outcome)
        .ok_or_else(|| Error::InvalidParameter(format!("outcome {outcome} out of range")))?;
    *entry += delta;
    if renormalize {
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
    }
    IntensityTable::from_raw(table.spin(), table.axes().to_vec(), probs, table.provenance())
}

/// Indirect values of a battery as `(name, Tr(ρ̂O))` pairs.
pub fn indirect_battery(
    rho_hat: &DensityMatrix,
    battery: &[(String, GenericOperator)],
) -> Result<Vec<(String, C64)>> {
    battery.iter().map(|(name, op)| Ok((name.clone(), expectation(rho_hat, op)?))).collect()
}
