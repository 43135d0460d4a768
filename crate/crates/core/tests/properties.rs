//! Property tests for the invariants of each module.

mod common;

use proptest::prelude::*;

use num_complex::Complex64 as C;

use spintomo::dynamics::{closure_check, energy, evolve_density, evolve_pure, quorum_trajectory, time_grid, Hamiltonian};
use spintomo::indirect::{consistency_test, indirect_expectation, ConsistencyMode, ReconMode};
use spintomo::linalg::unitarity_defect;
use spintomo::measurement::{
    measure_exact, measure_exact_pure, measure_sampled, rotate_vector, sg_probabilities, tripod_axes, Axis, QuorumSpec,
};
use spintomo::mixed::{build_map, design_axes, reconstruct_mixed, DesignStrategy, MixedOptions};
use spintomo::particle::{coherent_alpha, pauli_partner_check, GridWavefunction};
use spintomo::pure::{partners_nearby_axes, reconstruct_pure, verify_same_intensities, PureOptions};
use spintomo::spin::{
    expectation, random_density, random_operator, random_pure, rotation_about, rotation_to_axis, spin_operators,
    SpinValue,
};

fn axis() -> impl Strategy<Value = Axis> {
    (0.05f64..3.09, 0.0f64..std::f64::consts::TAU).prop_map(|(t, p)| Axis::new(t, p).unwrap())
}

fn designed(spin: SpinValue) -> QuorumSpec {
    design_axes(spin, 2 * spin.two_s() as usize + 1, DesignStrategy::ConeScan).unwrap().quorum
}

fn frob(a: &spintomo::linalg::CMatrix, b: &spintomo::linalg::CMatrix) -> f64 {
    common::frobenius(&(a - b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotations_are_unitary(two_s in 1u32..=12, a in axis(), angle in -7.0f64..7.0) {
        let spin = SpinValue::from_two_s(two_s);
        prop_assert!(unitarity_defect(&rotation_to_axis(spin, &a)) <= 1e-12);
        prop_assert!(unitarity_defect(&rotation_about(spin, a.unit_vector(), angle).unwrap()) <= 1e-12);
    }

    #[test]
    fn commutation_relations(two_s in 1u32..=12) {
        let ops = spin_operators(SpinValue::from_two_s(two_s));
        let i = C::new(0.0, 1.0);
        let comm = |a: &spintomo::linalg::CMatrix, b: &spintomo::linalg::CMatrix| a * b - b * a;
        prop_assert!(frob(&comm(&ops.sx, &ops.sy), &(&ops.sz * i)) <= 1e-12);
        prop_assert!(frob(&comm(&ops.sy, &ops.sz), &(&ops.sx * i)) <= 1e-12);
        prop_assert!(frob(&comm(&ops.sz, &ops.sx), &(&ops.sy * i)) <= 1e-12);
    }

    #[test]
    fn expectation_is_linear(two_s in 1u32..=6, seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.0f64..1.0) {
        let spin = SpinValue::from_two_s(two_s);
        let r1 = random_density(spin, seed, spin.dim()).unwrap();
        let r2 = random_density(spin, seed ^ 1, 1).unwrap();
        let o1 = random_operator(spin, seed, false);
        let o2 = random_operator(spin, seed ^ 2, false);
        let (ca, cb) = (C::new(a, 0.3), C::new(b, -0.7));
        let combined = o1.combine(ca, &o2, cb).unwrap();
        let lhs = expectation(&r1, &combined).unwrap();
        let rhs = ca * expectation(&r1, &o1).unwrap() + cb * expectation(&r1, &o2).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
        let mixed = expectation(&r1.mix(&r2, w), &o1).unwrap();
        let split = expectation(&r1, &o1).unwrap() * w + expectation(&r2, &o1).unwrap() * (1.0 - w);
        prop_assert!((mixed - split).norm() <= 1e-12);
    }

    #[test]
    fn pure_embedding_preserves_expectations(two_s in 1u32..=6, seed in any::<u64>()) {
        let spin = SpinValue::from_two_s(two_s);
        let psi = random_pure(spin, seed);
        let op = random_operator(spin, seed, false);
        let direct = psi.expectation(&op).unwrap();
        prop_assert!((direct - expectation(&psi.to_density(), &op).unwrap()).norm() <= 1e-12);
    }

    #[test]
    fn probabilities_form_a_distribution(two_s in 1u32..=8, seed in any::<u64>(), a in axis()) {
        let spin = SpinValue::from_two_s(two_s);
        let rho = random_density(spin, seed, 1 + (seed as usize) % spin.dim()).unwrap();
        let p = sg_probabilities(&rho, &a).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let oracle = common::probabilities(rho.matrix(), two_s, a.unit_vector());
        prop_assert!(common::max_abs_diff(&p, &oracle) <= 1e-12);
    }

    #[test]
    fn probabilities_are_affine_in_the_state(two_s in 1u32..=6, seed in any::<u64>(), a in axis(), w in 0.0f64..1.0) {
        let spin = SpinValue::from_two_s(two_s);
        let r1 = random_density(spin, seed, spin.dim()).unwrap();
        let r2 = random_density(spin, seed ^ 7, 1).unwrap();
        let mixed = sg_probabilities(&r1.mix(&r2, w), &a).unwrap();
        let (p1, p2) = (sg_probabilities(&r1, &a).unwrap(), sg_probabilities(&r2, &a).unwrap());
        let split: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| w * x + (1.0 - w) * y).collect();
        prop_assert!(common::max_abs_diff(&mixed, &split) <= 1e-12);
    }

    #[test]
    fn probabilities_are_rotation_covariant(two_s in 1u32..=6, seed in any::<u64>(), a in axis(), n in axis(), angle in -3.1f64..3.1) {
        let spin = SpinValue::from_two_s(two_s);
        let rho = random_density(spin, seed, spin.dim()).unwrap();
        let r = rotation_about(spin, n.unit_vector(), angle).unwrap();
        let moved = Axis::from_direction(rotate_vector(a.unit_vector(), n.unit_vector(), angle)).unwrap();
        let before = sg_probabilities(&rho, &a).unwrap();
        let after = sg_probabilities(&rho.transformed(&r), &moved).unwrap();
        prop_assert!(common::max_abs_diff(&before, &after) <= 1e-10);
    }

    #[test]
    fn mixed_round_trip(two_s in 1u32..=6, seed in any::<u64>()) {
        let spin = SpinValue::from_two_s(two_s);
        let q = designed(spin);
        let rho = random_density(spin, seed, spin.dim()).unwrap();
        let rec = reconstruct_mixed(&measure_exact(&rho, &q).unwrap(), &q, &MixedOptions::default()).unwrap();
        prop_assert!(rec.rho_hat.distance(&rho) <= 1e-8);
    }

    #[test]
    fn rank_grows_with_axes_and_obeys_bounds(two_s in 1u32..=4, axes in proptest::collection::vec(axis(), 1..10)) {
        let spin = SpinValue::from_two_s(two_s);
        let d = spin.dim();
        let mut previous = 0;
        for k in 1..=axes.len() {
            let q = QuorumSpec::explicit(axes[..k].to_vec()).unwrap();
            let rank = build_map(spin, &q).unwrap().rank();
            prop_assert!(rank >= previous);
            prop_assert!(rank <= (d * d).min(two_s as usize * k + 1));
            let units: Vec<[f64; 3]> = q.axes().iter().map(|a| a.unit_vector()).collect();
            prop_assert_eq!(rank, common::map_rank(two_s, &units));
            previous = rank;
        }
    }

    #[test]
    fn reconstruction_is_rotation_equivariant(two_s in 1u32..=4, seed in any::<u64>(), n in axis(), angle in -3.1f64..3.1) {
        let spin = SpinValue::from_two_s(two_s);
        let q = designed(spin);
        let rho = random_density(spin, seed, spin.dim()).unwrap();
        let r = rotation_about(spin, n.unit_vector(), angle).unwrap();
        let rq = q.rotated(|v| rotate_vector(v, n.unit_vector(), angle)).unwrap();
        let base = reconstruct_mixed(&measure_exact(&rho, &q).unwrap(), &q, &MixedOptions::default()).unwrap();
        let moved_rho = rho.transformed(&r);
        let moved = reconstruct_mixed(&measure_exact(&moved_rho, &rq).unwrap(), &rq, &MixedOptions::default()).unwrap();
        prop_assert!(moved.rho_hat.distance(&base.rho_hat.transformed(&r)) <= 1e-8);
    }

    #[test]
    fn partners_share_z_intensities(two_s in 1u32..=5, seed in any::<u64>()) {
        let spin = SpinValue::from_two_s(two_s);
        let psi = random_pure(spin, seed);
        let set = partners_nearby_axes(&psi).unwrap();
        prop_assert_eq!(set.len(), 1usize << two_s);
        let z = QuorumSpec::explicit(vec![Axis::z()]).unwrap();
        for cand in &set.candidates {
            prop_assert!(verify_same_intensities(&psi, cand, &z).unwrap());
        }
    }

    #[test]
    fn pure_round_trip_and_projector_cross_check(two_s in 1u32..=6, seed in any::<u64>(), e1 in axis(), e2 in axis(), e3 in axis()) {
        let spin = SpinValue::from_two_s(two_s);
        let psi = random_pure(spin, seed);
        let Ok(q) = tripod_axes(e1, e2, e3) else { return Ok(()) };
        let tp = spintomo::measurement::triple_product(&e1, &e2, &e3);
        prop_assume!(tp.abs() > 0.1);
        let table = measure_exact_pure(&psi, &q).unwrap();
        let rec = reconstruct_pure(&table, &PureOptions::default()).unwrap();
        prop_assert!(common::fidelity(rec.state.amplitudes(), psi.amplitudes()) >= 1.0 - 1e-8);
        let back = measure_exact(&rec.state.to_density(), &q).unwrap();
        prop_assert!(common::max_abs_diff(&back.stacked(), &table.stacked()) <= 1e-8);
        // relabeling axes 2 and 3
        let swapped = tripod_axes(e1, e3, e2).unwrap();
        let rec2 = reconstruct_pure(&measure_exact_pure(&psi, &swapped).unwrap(), &PureOptions::default()).unwrap();
        prop_assert!((rec.residual - rec2.residual).abs() <= 1e-8);
    }

    #[test]
    fn indirect_value_is_linear_in_operator(two_s in 1u32..=4, seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let spin = SpinValue::from_two_s(two_s);
        let q = designed(spin);
        let table = measure_exact(&random_density(spin, seed, spin.dim()).unwrap(), &q).unwrap();
        let (o1, o2) = (random_operator(spin, seed, false), random_operator(spin, seed ^ 3, false));
        let (ca, cb) = (C::new(a, 0.1), C::new(b, 0.0));
        let mode = ReconMode::default();
        let v = |o: &spintomo::spin::GenericOperator| indirect_expectation(&table, &q, o, &mode).unwrap().value;
        let combined = o1.combine(ca, &o2, cb).unwrap();
        let lhs = v(&combined);
        prop_assert!((lhs - (ca * v(&o1) + cb * v(&o2))).norm() <= 1e-12);
    }

    #[test]
    fn exact_consistency_never_fails(two_s in 1u32..=3, seed in any::<u64>(), holdout in axis()) {
        let spin = SpinValue::from_two_s(two_s);
        let q = designed(spin);
        prop_assume!(q.min_angle_to(&holdout) > 1e-3);
        let rho = random_density(spin, seed, 1 + (seed as usize) % spin.dim()).unwrap();
        prop_assert!(consistency_test(&rho, &q, &holdout, ConsistencyMode::Exact).unwrap().pass);
    }

    #[test]
    fn evolution_conserves(two_s in 1u32..=4, seed in any::<u64>(), n in axis(), kappa in -1.0f64..1.0, t in 0.0f64..50.0) {
        let spin = SpinValue::from_two_s(two_s);
        let h = Hamiltonian::quadratic(spin, 1.0, n.unit_vector(), kappa).unwrap();
        let rho = random_density(spin, seed, spin.dim()).unwrap();
        let r = evolve_density(&rho, &h, t).unwrap();
        prop_assert!((r.trace().re - 1.0).abs() <= 1e-12);
        prop_assert!((r.purity() - rho.purity()).abs() <= 1e-12);
        prop_assert!((energy(&r, &h).unwrap() - energy(&rho, &h).unwrap()).abs() <= 1e-12);
        let psi = evolve_pure(&random_pure(spin, seed), &h, t).unwrap();
        prop_assert!((psi.amplitudes().norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn odd_states_share_both_densities(coeffs in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..4), width in 0.6f64..1.5) {
        // Σ_k c_k x^{2k+1} · e^{−x²/(2w²)}
        let psi = GridWavefunction::odd_from_fn(256, 10.0, |x| {
            let env = (-0.5 * x * x / (width * width)).exp();
            coeffs.iter().enumerate().map(|(k, &(re, im))| C::new(re, im) * x.powi(2 * k as i32 + 1)).sum::<C>() * env
        });
        let Ok(psi) = psi else { return Ok(()) };
        let r = pauli_partner_check(&psi).unwrap();
        prop_assert!(r.position_gap <= 1e-12);
        prop_assert!(r.momentum_gap <= 1e-10);
        prop_assert!(r.parseval_defect <= 1e-10);
    }

    #[test]
    fn coherent_alpha_is_linear(x1 in -5.0f64..5.0, p1 in -5.0f64..5.0, x2 in -5.0f64..5.0, p2 in -5.0f64..5.0, a in -3.0f64..3.0, m in 0.1f64..4.0, w in 0.1f64..4.0) {
        let f = |x, p| coherent_alpha(x, p, m, w, 1.0).unwrap();
        let lhs = f(a * x1 + x2, a * p1 + p2);
        let rhs = f(x1, p1) * a + f(x2, p2);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn closure_holds_on_injective_quorums(two_s in 1u32..=4, seed in any::<u64>(), n in axis(), kappa in -1.0f64..1.0) {
        let spin = SpinValue::from_two_s(two_s);
        let q = designed(spin);
        let rho = random_density(spin, seed, spin.dim()).unwrap();
        for h in [Hamiltonian::zeeman(spin, 1.0, n.unit_vector()).unwrap(), Hamiltonian::quadratic(spin, 1.0, n.unit_vector(), kappa).unwrap()] {
            let traj = quorum_trajectory(&rho, &h, &time_grid(0.0, 10.0, 100).unwrap(), &q).unwrap();
            let report = closure_check(&traj, &h, &ReconMode::Mixed(MixedOptions::default())).unwrap();
            prop_assert!(report.max_deviation <= 1e-8);
        }
    }
}

#[test]
fn sampling_error_scales_as_inverse_root_shots() {
    // a hundredfold increase in shots shrinks the mean deviation tenfold
    let spin = SpinValue::ONE;
    let rho = random_density(spin, 3, 3).unwrap();
    let q = QuorumSpec::explicit(vec![Axis::new(0.9, 0.4).unwrap()]).unwrap();
    let exact = measure_exact(&rho, &q).unwrap();
    let mad = |shots: u64| {
        (0..100)
            .map(|seed| {
                let t = measure_sampled(&rho, &q, shots, seed).unwrap();
                common::max_abs_diff(t.probabilities(0), exact.probabilities(0))
            })
            .sum::<f64>()
            / 100.0
    };
    let ratio = mad(10_000) / mad(1_000_000);
    assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
}
