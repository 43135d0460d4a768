//! Built-in acceptance battery. Every check is seeded and the report holds
//! no timings, so equal seeds give byte-identical reports.

use std::fmt;

use rand::Rng;

use crate::dynamics::{closure_check, energy, evolve_density, generator_probe, quorum_trajectory, time_grid, Hamiltonian};
use crate::error::Result;
use crate::indirect::{
    battery_max_error, consistency_from_tables, consistency_test, corrupt_entry, operator_battery, ConsistencyMode,
    ReconMode,
};
use crate::linalg::c;
use crate::measurement::{
    cone_axes, default_tripod, measure_exact, measure_exact_pure, measure_sampled, triple_product, tripod_axes, Axis,
    QuorumSpec,
};
use crate::mixed::{certify_quorum, design_axes, reconstruct_mixed, DesignStrategy, MixedOptions, DEFAULT_CONE_THETA};
use crate::particle::{coherent_alpha, make_counterexample, pauli_partner_check};
use crate::pure::{
    first_order_response, measured_numbers, partners_nearby_axes, reconstruct_pure, select_by_third_axis,
    verify_same_intensities, PureOptions, SAME_RAY_FIDELITY,
};
use crate::spin::{random_density, random_pure, rng_from_seed, SpinValue};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} [{}] {}: {}", self.criterion, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "selftest seed {}", self.seed)?;
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        writeln!(f, "summary {passed}/{} checks passed", self.checks.len())
    }
}

fn check(criterion: u8, name: &str, pass: bool, detail: String) -> Check {
    Check { criterion, name: name.to_string(), pass, detail }
}

/// Errors become failed checks so one broken criterion does not hide the rest.
fn guarded(criterion: u8, name: &str, run: impl FnOnce() -> Result<Vec<Check>>) -> Vec<Check> {
    run().unwrap_or_else(|e| vec![check(criterion, name, false, format!("error: {e}"))])
}

/// Independent seed per criterion and item.
fn sub_seed(seed: u64, criterion: u64, item: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(criterion << 32).wrapping_add(item)
}

fn designed_quorum(spin: SpinValue) -> Result<QuorumSpec> {
    Ok(design_axes(spin, 2 * spin.two_s() as usize + 1, DesignStrategy::ConeScan)?.quorum)
}

/// Mixed round-trip on designed quorums for `s ≤ 3`.
pub fn check_mixed_round_trip(seed: u64) -> Vec<Check> {
    const NAME: &str = "mixed round-trip s<=3, 20 states each";
    guarded(1, NAME, || {
        let mut worst: f64 = 0.0;
        let mut injective = true;
        for two_s in 1..=6u32 {
            let spin = SpinValue::from_two_s(two_s);
            let q = designed_quorum(spin)?;
            injective &= certify_quorum(spin, &q)?.injective;
            for i in 0..20 {
                let rho = random_density(spin, sub_seed(seed, 1, 100 * two_s as u64 + i), spin.dim())?;
                let rec = reconstruct_mixed(&measure_exact(&rho, &q)?, &q, &MixedOptions::default())?;
                worst = worst.max(rec.rho_hat.distance(&rho));
            }
        }
        Ok(vec![check(
            1,
            NAME,
            injective && worst <= 1e-8,
            format!("max frobenius error {worst:.3e} (tol 1e-8), quorums certified injective: {injective}"),
        )])
    })
}

/// Cone ranks at `2s+1`, `2s+2` and `4s+1` axes for `s = 1/2, 1`.
pub fn check_quorum_counts() -> Vec<Check> {
    let mut out = Vec::new();
    for spin in [SpinValue::HALF, SpinValue::ONE] {
        let two_s = spin.two_s() as usize;
        let cases = [
            (two_s + 1, "(2s+1)-axis cone rank-deficient", true),
            (two_s + 2, "(2s+2)-axis cone full-rank", false),
            (2 * two_s + 1, "(4s+1)-axis cone full-rank", false),
        ];
        for (k, label, want_deficit) in cases {
            let name = format!("s={spin} {label}");
            out.extend(guarded(2, &name, || {
                let r = certify_quorum(spin, &cone_axes(k, DEFAULT_CONE_THETA)?)?;
                let pass = if want_deficit { r.deficit >= 1 } else { r.deficit == 0 };
                let detail = format!("K={k} rank {} of {}, deficit {}", r.rank, r.full_dimension, r.deficit);
                Ok(vec![check(2, &name, pass, detail)])
            }));
        }
    }
    out
}

/// Three non-coplanar, pairwise non-orthogonal axes drawn from `seed`.
pub fn random_tripod(seed: u64) -> QuorumSpec {
    let mut rng = rng_from_seed(seed);
    loop {
        let axes: Vec<Axis> = (0..3)
            .map(|_| {
                let theta = rng.random_range(0.2..std::f64::consts::PI - 0.2);
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                Axis::new(theta, phi).expect("finite angles")
            })
            .collect();
        let dot = |a: &Axis, b: &Axis| a.unit_vector().iter().zip(b.unit_vector()).map(|(x, y)| x * y).sum::<f64>();
        let skew = (0..3).all(|i| dot(&axes[i], &axes[(i + 1) % 3]).abs() > 0.05);
        if skew && triple_product(&axes[0], &axes[1], &axes[2]).abs() > 0.2 {
            return tripod_axes(axes[0], axes[1], axes[2]).expect("non-coplanar axes");
        }
    }
}

/// Pure round-trip on `{z, x, y}` and a random tripod for `s ≤ 4`.
pub fn check_pure_round_trip(seed: u64) -> Vec<Check> {
    const NAME: &str = "pure round-trip s<=4, 100 states, 2 tripods";
    guarded(3, NAME, || {
        let tripods = [tripod_axes(Axis::z(), Axis::x(), Axis::y())?, random_tripod(sub_seed(seed, 3, 0))];
        let mut worst: f64 = 1.0;
        for two_s in 1..=8u32 {
            let spin = SpinValue::from_two_s(two_s);
            for i in 0..100 {
                let psi = random_pure(spin, sub_seed(seed, 3, 1000 * two_s as u64 + i + 1));
                for q in &tripods {
                    let rec = reconstruct_pure(&measure_exact_pure(&psi, q)?, &PureOptions::default())?;
                    worst = worst.min(rec.state.fidelity(&psi));
                }
            }
        }
        let pass = worst >= 1.0 - 1e-8;
        Ok(vec![check(3, NAME, pass, format!("min fidelity 1 - {:.3e} (tol 1e-8)", 1.0 - worst))])
    })
}

/// Partner count, shared `z` intensities, shared tilt response and unique
/// survival of the `y` filter.
pub fn check_partner_census(seed: u64) -> Vec<Check> {
    const NAME: &str = "partner census s<=2, 10 states each";
    guarded(4, NAME, || {
        let z = QuorumSpec::explicit(vec![Axis::z()])?;
        let y = QuorumSpec::explicit(vec![Axis::y()])?;
        let mut counts = Vec::new();
        let mut ok = true;
        let mut worst_response: f64 = 0.0;
        for two_s in 1..=4u32 {
            let spin = SpinValue::from_two_s(two_s);
            let mut count_ok = true;
            for i in 0..10 {
                let psi = random_pure(spin, sub_seed(seed, 4, 100 * two_s as u64 + i));
                let set = partners_nearby_axes(&psi)?;
                count_ok &= set.len() == 1 << two_s;
                let response = first_order_response(&psi, 1e-4)?;
                for cand in &set.candidates {
                    ok &= verify_same_intensities(&psi, cand, &z)?;
                    let r = first_order_response(cand, 1e-4)?;
                    let gap = r.iter().zip(&response).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    worst_response = worst_response.max(gap);
                }
                let (_, survivor) = select_by_third_axis(&set, &measure_exact_pure(&psi, &y)?, 1e-9)?;
                ok &= survivor.fidelity(&psi) >= SAME_RAY_FIDELITY;
            }
            ok &= count_ok;
            counts.push(format!("{}{}", 1u32 << two_s, if count_ok { "" } else { "!" }));
        }
        ok &= worst_response <= 1e-6;
        let detail = format!(
            "counts {} (expected 2,4,8,16), max tilt-response gap {worst_response:.3e} (tol 1e-6), y filter unique: {ok}",
            counts.join(",")
        );
        Ok(vec![check(4, NAME, ok, detail)])
    })
}

/// Three-axis tables carry `6s` independent numbers.
pub fn check_measured_numbers() -> Vec<Check> {
    const NAME: &str = "three-axis method uses 6s numbers, s<=4";
    guarded(5, NAME, || {
        let mut ok = true;
        for two_s in 1..=8u32 {
            let spin = SpinValue::from_two_s(two_s);
            let table = measure_exact_pure(&random_pure(spin, two_s as u64), &default_tripod())?;
            ok &= measured_numbers(spin) == 3 * two_s as usize && table.independent_values() == measured_numbers(spin);
        }
        Ok(vec![check(5, NAME, ok, format!("3(2s+1)-3 = 6s for 2s = 1..8: {ok}"))])
    })
}

/// Indirect battery on exact data, sampled consistency and corruption flag.
pub fn check_indirect(seed: u64) -> Vec<Check> {
    let mut out = guarded(6, "indirect battery", || {
        let mut worst: f64 = 0.0;
        let mut size = usize::MAX;
        for two_s in 1..=3u32 {
            let spin = SpinValue::from_two_s(two_s);
            let q = designed_quorum(spin)?;
            let rho = random_density(spin, sub_seed(seed, 6, two_s as u64), spin.dim())?;
            let rec = reconstruct_mixed(&measure_exact(&rho, &q)?, &q, &MixedOptions::default())?;
            let battery = operator_battery(spin, sub_seed(seed, 6, 10 + two_s as u64));
            size = size.min(battery.len());
            worst = worst.max(battery_max_error(&rho, &rec.rho_hat, &battery)?);
        }
        let name = format!("indirect battery of {size} operators, s<=3/2");
        Ok(vec![check(6, &name, size >= 20 && worst <= 1e-8, format!("max |indirect - direct| {worst:.3e} (tol 1e-8)"))])
    });
    let spin = SpinValue::ONE;
    let holdout = Axis::new(0.77, 0.3).expect("valid angles");
    const CONSISTENCY: &str = "sampled consistency 1e5 shots, 50 runs";
    out.extend(guarded(6, CONSISTENCY, || {
        let q = designed_quorum(spin)?;
        let mut passes = 0;
        for i in 0..50 {
            let rho = random_density(spin, sub_seed(seed, 6, 100 + i), 3)?;
            let mode = ConsistencyMode::Sampled { shots: 100_000, seed: sub_seed(seed, 6, 200 + i) };
            passes += consistency_test(&rho, &q, &holdout, mode)?.pass as usize;
        }
        Ok(vec![check(6, CONSISTENCY, passes >= 47, format!("{passes}/50 runs pass at |z| <= 4 (need 47)"))])
    }));
    const CORRUPTION: &str = "table corrupted by 0.05 is flagged";
    out.extend(guarded(6, CORRUPTION, || {
        let q = designed_quorum(spin)?;
        let rho = random_density(spin, sub_seed(seed, 6, 300), 3)?;
        let mode = ConsistencyMode::Sampled { shots: 100_000, seed: sub_seed(seed, 6, 301) };
        let clean = consistency_test(&rho, &q, &holdout, mode)?;
        let table = measure_sampled(&rho, &q, 100_000, sub_seed(seed, 6, 301))?;
        let mut flagged = 0;
        for renormalize in [false, true] {
            let bad = corrupt_entry(&table, 1, 0, 0.05, renormalize)?;
            flagged += !consistency_from_tables(&bad, &q, &holdout, &clean.direct, mode)?.pass as usize;
        }
        let detail = format!("clean run passes: {}, corrupted runs flagged {flagged}/2", clean.pass);
        Ok(vec![check(6, CORRUPTION, clean.pass && flagged == 2, detail)])
    }));
    out
}

/// Closure, conservation and generator convergence for `s = 1/2, 1`.
pub fn check_dynamics(seed: u64) -> Vec<Check> {
    let mut closure: f64 = 0.0;
    let mut conservation: f64 = 0.0;
    let mut ratios = Vec::new();
    let run = |closure: &mut f64, conservation: &mut f64, ratios: &mut Vec<f64>| -> Result<()> {
        let n = Axis::new(0.4, 1.0)?.unit_vector();
        let times = time_grid(0.0, 10.0, 100)?;
        for spin in [SpinValue::HALF, SpinValue::ONE] {
            let q = designed_quorum(spin)?;
            for (j, h) in [Hamiltonian::zeeman(spin, 1.0, n)?, Hamiltonian::quadratic(spin, 1.0, n, 0.3)?]
                .into_iter()
                .enumerate()
            {
                let rho = random_density(spin, sub_seed(seed, 7, 10 * spin.two_s() as u64 + j as u64), spin.dim())?;
                let traj = quorum_trajectory(&rho, &h, &times, &q)?;
                let report = closure_check(&traj, &h, &ReconMode::Mixed(MixedOptions::default()))?;
                *closure = closure.max(report.max_deviation);
                let psi = random_pure(spin, sub_seed(seed, 7, 100 + spin.two_s() as u64));
                let (e0, p0) = (energy(&rho, &h)?, rho.purity());
                for &t in &times {
                    let r = evolve_density(&rho, &h, t)?;
                    let norm = (h.propagator(t) * psi.amplitudes()).norm();
                    *conservation = conservation
                        .max((norm - 1.0).abs())
                        .max((r.trace() - c(1.0, 0.0)).norm())
                        .max((r.purity() - p0).abs())
                        .max((energy(&r, &h)? - e0).abs());
                }
                let coarse = generator_probe(&rho, &h, &q, 1e-3)?;
                let fine = generator_probe(&rho, &h, &q, 5e-4)?;
                ratios.push(coarse.max_gap / fine.max_gap);
            }
        }
        Ok(())
    };
    if let Err(e) = run(&mut closure, &mut conservation, &mut ratios) {
        return vec![check(7, "dynamics", false, format!("error: {e}"))];
    }
    let ratio_ok = ratios.iter().all(|r| (r - 4.0).abs() <= 0.2);
    let ratio_text = ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(",");
    vec![
        check(7, "closure, 100 steps over [0, 10]", closure <= 1e-8, format!("max deviation {closure:.3e} (tol 1e-8)")),
        check(
            7,
            "norm, trace, purity, energy conserved",
            conservation <= 1e-12,
            format!("max drift {conservation:.3e} (tol 1e-12)"),
        ),
        check(7, "generator gap shrinks 4x when dt halves", ratio_ok, format!("ratios {ratio_text} (4 +- 0.2)")),
    ]
}

/// Odd-parity counterexample on `N = 256`, `L = 10` and coherent-state
/// substitutions.
pub fn check_particle() -> Vec<Check> {
    let mut out = guarded(8, "particle counterexample N=256 L=10", || {
        let r = pauli_partner_check(&make_counterexample(256, 10.0)?)?;
        let pass = r.position_gap <= 1e-12 && r.momentum_gap <= 1e-10 && r.independent;
        let detail = format!(
            "position gap {:.3e} (tol 1e-12), momentum gap {:.3e} (tol 1e-10), |<psi*|psi>| {:.6}",
            r.position_gap, r.momentum_gap, r.overlap
        );
        Ok(vec![check(8, "particle counterexample N=256 L=10", pass, detail)])
    });
    out.extend(guarded(8, "coherent alpha substitutions", || {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let cases = [
            (2f64.sqrt(), 0.0, 1.0, 1.0, 1.0, c(1.0, 0.0)),
            (0.0, 0.0, 1.0, 1.0, 1.0, c(0.0, 0.0)),
            (1.0, 1.0, 2.0, 0.5, 1.0, c(r, r)),
        ];
        let mut worst: f64 = 0.0;
        for (x, p, m, w, hbar, want) in cases {
            worst = worst.max((coherent_alpha(x, p, m, w, hbar)? - want).norm());
        }
        Ok(vec![check(8, "coherent alpha substitutions", worst <= 1e-12, format!("max error {worst:.3e} (tol 1e-12)"))])
    }));
    out
}

/// Seeded sampling and reconstruction repeated with identical bits.
pub fn check_determinism(seed: u64) -> Vec<Check> {
    const NAME: &str = "seeded runs are bit-reproducible";
    guarded(9, NAME, || {
        let spin = SpinValue::ONE;
        let q = designed_quorum(spin)?;
        let once = || -> Result<String> {
            let rho = random_density(spin, sub_seed(seed, 9, 0), 3)?;
            let table = measure_sampled(&rho, &q, 1000, sub_seed(seed, 9, 1))?;
            let rec = reconstruct_mixed(&table, &q, &MixedOptions::default())?;
            let psi = random_pure(spin, sub_seed(seed, 9, 2));
            let pure = reconstruct_pure(&measure_exact_pure(&psi, &default_tripod())?, &PureOptions::default())?;
            Ok(format!("{}{:?}{:?}", table.to_text(), rec.rho_hat.matrix(), pure.state.amplitudes()))
        };
        let same = once()? == once()?;
        Ok(vec![check(9, NAME, same, format!("repeated sampled and pure reconstructions identical: {same}"))])
    })
}

/// Runs every check in criterion order.
pub fn run_selftest(seed: u64) -> SelftestReport {
    let mut checks = check_mixed_round_trip(seed);
    checks.extend(check_quorum_counts());
    checks.extend(check_pure_round_trip(seed));
    checks.extend(check_partner_census(seed));
    checks.extend(check_measured_numbers());
    checks.extend(check_indirect(seed));
    checks.extend(check_dynamics(seed));
    checks.extend(check_particle());
    checks.extend(check_determinism(seed));
    SelftestReport { seed, checks }
}
