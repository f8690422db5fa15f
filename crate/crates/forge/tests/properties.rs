//! Property-based checks over randomly generated complexes, circuits, and
//! patterns. Generation goes through a seeded ChaCha generator so shrunk
//! failures stay reproducible.

mod common;

use proptest::prelude::*;
use spacetime_forge::chainmap::{apply_rule_a, apply_rule_b, reduce_to_fixpoint};
use spacetime_forge::circuit::spacetime_complex;
use spacetime_forge::gf2::BitMatrix;
use spacetime_forge::pauli::PauliOp;

use common::{all_syndromes, random_bitvector, random_circuit, random_complex, rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The constructor guarantee: `d1·d2 = 0` for every generated complex.
    #[test]
    fn chain_condition_holds(seed in any::<u64>()) {
        let c = random_complex(&mut rng(seed), 12);
        let product = c.d1().multiply(c.d2()).expect("shapes match");
        prop_assert_eq!(product.rank(), 0);
    }

    /// Rank-nullity through homology: rank d2 + dim H1 + rank d1 = dim C1.
    #[test]
    fn rank_decomposition_sums_to_dim_c1(seed in any::<u64>()) {
        let c = random_complex(&mut rng(seed), 12);
        let total = c.d2().rank() + c.homology_dimension() + c.d1().rank();
        prop_assert_eq!(total, c.dim_c1());
    }

    /// Every decoding witness reproduces its syndrome and never weighs more
    /// than the error that produced the syndrome.
    #[test]
    fn mwd_witness_is_valid_and_minimal(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let c = random_complex(&mut rng, 10);
        let e = random_bitvector(&mut rng, c.dim_c1());
        let s = c.d1().mul_vec(&e).expect("widths match");
        let (weight, witness) = c.mwd(&s, 24).expect("within cap");
        prop_assert_eq!(c.d1().mul_vec(&witness).expect("widths match"), s);
        prop_assert!(weight <= e.weight());
    }

    /// The decoding weight depends only on the syndrome: errors in the same
    /// coset decode to the same weight.
    #[test]
    fn mwd_weight_is_coset_invariant(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let c = random_complex(&mut rng, 10);
        let e = random_bitvector(&mut rng, c.dim_c1());
        // Shift by a random kernel element: the syndrome is unchanged.
        let kernel = c.d1().kernel_basis();
        let mut shifted = e.clone();
        for k in 0..kernel.rows() {
            if (seed >> (k % 64)) & 1 == 1 {
                shifted.xor_assign(&kernel.row(k));
            }
        }
        let s1 = c.d1().mul_vec(&e).expect("widths match");
        let s2 = c.d1().mul_vec(&shifted).expect("widths match");
        prop_assert_eq!(&s1, &s2);
        prop_assert_eq!(c.mwd(&s1, 24).expect("within cap"),
                        c.mwd(&s2, 24).expect("within cap"));
    }

    /// Rule A and rule B maps: the forward map never increases the weight
    /// of an error vector and the backward map preserves it exactly.
    #[test]
    fn reduction_maps_control_weights(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let c = random_complex(&mut rng, 12);
        for gauge in 0..c.dim_c2() {
            let weight = c.d2().col(gauge).weight();
            let result = match weight {
                1 => apply_rule_b(&c, gauge),
                2 => apply_rule_a(&c, gauge),
                _ => continue,
            };
            let (reduced, app) = result.expect("preconditions checked");
            for i in 0..c.dim_c1() {
                let e = spacetime_forge::gf2::BitVector::from_indices(c.dim_c1(), &[i]);
                let fe = app.forward.f1.mul_vec(&e).expect("widths match");
                prop_assert!(fe.weight() <= e.weight());
            }
            for i in 0..reduced.dim_c1() {
                let e = spacetime_forge::gf2::BitVector::from_indices(reduced.dim_c1(), &[i]);
                let he = app.backward.f1.mul_vec(&e).expect("widths match");
                prop_assert_eq!(he.weight(), e.weight());
            }
            let e = random_bitvector(&mut rng, c.dim_c1());
            let fe = app.forward.f1.mul_vec(&e).expect("widths match");
            prop_assert!(fe.weight() <= e.weight());
        }
    }

    /// The round trip `h1∘f1` moves every vector only by a boundary.
    #[test]
    fn round_trip_differs_by_boundaries(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let c = random_complex(&mut rng, 12);
        let reduction = reduce_to_fixpoint(&c).expect("reduction succeeds");
        let boundaries = c.d2().transpose();
        let composed = reduction
            .backward
            .f1
            .multiply(&reduction.forward.f1)
            .expect("shapes match");
        for i in 0..c.dim_c1() {
            let e = spacetime_forge::gf2::BitVector::from_indices(c.dim_c1(), &[i]);
            let mut diff = composed.mul_vec(&e).expect("widths match");
            diff.xor_assign(&e);
            prop_assert!(boundaries.rowspace_contains(&diff));
        }
    }

    /// Reduction to fixpoint preserves the homology dimension, the
    /// distance when defined, and every decoding weight.
    #[test]
    fn fixpoint_preserves_the_decoding_problem(seed in any::<u64>()) {
        let c = random_complex(&mut rng(seed), 8);
        let reduction = reduce_to_fixpoint(&c).expect("reduction succeeds");
        let reduced = &reduction.complex;
        prop_assert_eq!(c.homology_dimension(), reduced.homology_dimension());
        if c.homology_dimension() > 0 {
            prop_assert_eq!(
                c.distance(24).expect("within cap"),
                reduced.distance(24).expect("within cap")
            );
        }
        for s in all_syndromes(&c) {
            let (w, _) = c.mwd(&s, 24).expect("within cap");
            let fs = reduction.forward.f0.mul_vec(&s).expect("widths match");
            let (w2, _) = reduced.mwd(&fs, 24).expect("within cap");
            prop_assert_eq!(w, w2);
        }
    }

    /// Spackles and backles of every measured operator are gauge
    /// operators: their symplectic vectors lie in the row space of the
    /// elementary-propagation matrix.
    #[test]
    fn spackles_and_backles_are_gauge_operators(seed in any::<u64>()) {
        let circuit = random_circuit(&mut rng(seed), 3, 4);
        let sc = spacetime_complex(&circuit).expect("normalized circuit");
        let gauge = sc.complex().d2().transpose();
        let n = circuit.n();
        for (col, elems) in circuit.columns().iter().enumerate() {
            let t = col + 1;
            for e in elems {
                let spacetime_forge::circuit::CircuitElement::MeasurePauli(q) = e else {
                    continue;
                };
                let sp = circuit.spackle(q, t + 1).expect("valid timestep");
                let bk = circuit.backle(q, t).expect("valid timestep");
                if common::measurement_compatible(&circuit, &sp) {
                    prop_assert!(gauge.rowspace_contains(&sp.symplectic()));
                }
                if common::measurement_compatible(&circuit, &bk) {
                    prop_assert!(gauge.rowspace_contains(&bk.symplectic()));
                }
            }
        }
        for &(wire, basis) in circuit.final_measurements() {
            let p = match basis {
                spacetime_forge::circuit::MeasBasis::X => PauliOp::single_x(n, wire),
                spacetime_forge::circuit::MeasBasis::Y => {
                    PauliOp::single_x(n, wire).mul(&PauliOp::single_z(n, wire))
                }
            };
            let t_max = circuit.t_max();
            let sp = circuit.spackle(&p, t_max).expect("valid timestep");
            let bk = circuit.backle(&p, t_max).expect("valid timestep");
            if common::measurement_compatible(&circuit, &sp) {
                prop_assert!(gauge.rowspace_contains(&sp.symplectic()));
            }
            if common::measurement_compatible(&circuit, &bk) {
                prop_assert!(gauge.rowspace_contains(&bk.symplectic()));
            }
        }
    }

    /// Every spacetime stabilizer commutes symplectically with every gauge
    /// generator.
    #[test]
    fn stabilizers_commute_with_the_gauge_group(seed in any::<u64>()) {
        let circuit = random_circuit(&mut rng(seed), 3, 4);
        let sc = spacetime_complex(&circuit).expect("normalized circuit");
        let stabilizers: &BitMatrix = sc.stabilizers();
        for k in 0..stabilizers.rows() {
            let s = spacetime_forge::pauli::omega(&stabilizers.row(k));
            for g in sc.generators() {
                prop_assert!(!g.operator.symplectic().dot(&s));
            }
        }
    }
}
