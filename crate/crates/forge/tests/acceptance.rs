//! End-to-end acceptance checks for the whole workspace, reported one
//! pass/fail line per criterion. Run with `--nocapture` to see the lines
//! as they complete.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};

use common::{
    all_syndromes, graph_isomorphic, measurement_compatible, naive_distance, naive_mwd,
    random_circuit, random_complex, random_pattern, rng,
};
use rand::Rng;
use spacetime_forge::chainmap::{
    apply_rule_a, apply_rule_b, certify_fault_tolerant, reduce_to_fixpoint,
};
use spacetime_forge::circuit::{
    parse_circuit, spacetime_complex, CircuitElement, CliffordCircuit, MeasBasis,
};
use spacetime_forge::compile::compile;
use spacetime_forge::complex::{ChainComplex2, Label, NodeKind};
use spacetime_forge::foliate::{foliate_css, foliate_dynamical, foliate_stabilizer, DynamicalSchedule};
use spacetime_forge::gf2::{BitMatrix, BitVector};
use spacetime_forge::mbqc::{
    cluster_state_complex, verify_equivalence_to_spacetime, ErrorNodeKind, MbqcPattern,
};
use spacetime_forge::pauli::{
    bacon_shor, css_complex, stabilizer_complex, subsystem_complex, PauliOp, StabilizerCode,
};

fn bits(rows: &[&str]) -> BitMatrix {
    let cols = rows.first().map_or(0, |r| r.len());
    let rows: Vec<BitVector> = rows.iter().map(|r| BitVector::parse(r).unwrap()).collect();
    BitMatrix::from_rows(&rows, cols)
}

const TRANSVERSAL_S: &str = "WIRES 6\nINPUT XX____\nINPUT ZZ____\n\
PLUS 2\nPLUS 3\nPLUS 4\nPLUS 5\n\
CP 2 ZZ____\nTICK\nCP 3 XX____\nTICK\nS 0\nS 1\nTICK\n\
CP 4 XX____\nTICK\nCP 5 ZZ____\n\
MX 2\nMX 3\nMX 4\nMX 5\n";

const SWAP_THREE_CNOTS: &str = "WIRES 2\nCP 0 _X\nTICK\nCP 1 X_\nTICK\nCP 0 _X\n";

/// Complexes produced by every constructor in the workspace, used by the
/// structural criteria below.
fn corpus() -> Vec<ChainComplex2> {
    let mut out = Vec::new();

    // CSS codes: 3-bit repetition, a single ZZ check, and [[4,1,2]].
    out.push(css_complex(&BitMatrix::zeros(0, 3), &bits(&["110", "011"])).unwrap());
    out.push(css_complex(&BitMatrix::zeros(0, 2), &bits(&["11"])).unwrap());
    out.push(css_complex(&bits(&["1111"]), &bits(&["1100", "0011"])).unwrap());

    // A non-CSS stabilizer code and the five-qubit code.
    let xzzx = StabilizerCode::new(
        2,
        &[PauliOp::parse("XZ").unwrap(), PauliOp::parse("ZX").unwrap()],
    )
    .unwrap();
    out.push(stabilizer_complex(&xzzx));
    let five = StabilizerCode::new(
        5,
        &[
            PauliOp::parse("XZZX_").unwrap(),
            PauliOp::parse("_XZZX").unwrap(),
            PauliOp::parse("X_XZZ").unwrap(),
            PauliOp::parse("ZX_XZ").unwrap(),
        ],
    )
    .unwrap();
    out.push(stabilizer_complex(&five));

    // Subsystem codes.
    out.push(subsystem_complex(&bacon_shor(2, 2)));
    out.push(subsystem_complex(&bacon_shor(3, 3)));

    // Spacetime complexes of small circuits.
    for src in [
        "WIRES 1\nH 0\n",
        "WIRES 2\nINPUT ZZ\n",
        SWAP_THREE_CNOTS,
        TRANSVERSAL_S,
    ] {
        let c = parse_circuit(src).unwrap().normalize();
        out.push(spacetime_complex(&c).unwrap().complex().clone());
    }

    // Cluster-state complexes of compiled patterns.
    for src in ["WIRES 1\nH 0\n", "WIRES 2\nINPUT ZZ\nH 0\nH 1\n"] {
        let circuit = parse_circuit(src).unwrap();
        let result = compile(&circuit, false, 24).unwrap();
        out.push(cluster_state_complex(&result.pattern).unwrap().complex().clone());
    }

    // Foliations: a CSS code, a stabilizer code, and a dynamical schedule.
    out.push(
        foliate_css(&BitMatrix::zeros(0, 2), &bits(&["11"]), 1)
            .unwrap()
            .complex()
            .complex()
            .clone(),
    );
    out.push(foliate_stabilizer(&xzzx, 1).unwrap().complex().complex().clone());
    let sched = DynamicalSchedule::parse("M XXXX\nROUND\nM ZZZZ\nROUND\nM XXXX\nROUND\nM ZZZZ\n")
        .unwrap();
    out.push(foliate_dynamical(&sched).unwrap().complex().complex().clone());

    // Reduced fixpoints of a few of the above.
    let reduced: Vec<ChainComplex2> = out
        .iter()
        .step_by(3)
        .map(|c| reduce_to_fixpoint(c).unwrap().complex)
        .collect();
    out.extend(reduced);
    out
}

/// Criterion 1: the composite boundary map vanishes on every complex the
/// workspace can construct.
fn chain_condition_everywhere() {
    let cases = corpus();
    assert!(cases.len() >= 15, "corpus too small: {}", cases.len());
    for (i, c) in cases.iter().enumerate() {
        let composite = c.d1().multiply(c.d2()).unwrap();
        for r in 0..composite.rows() {
            assert!(
                composite.row(r).is_zero(),
                "complex {i}: d1*d2 has a nonzero row {r}"
            );
        }
    }
}

/// Criterion 2: every single application of a reduction rule on a random
/// complex comes with forward/backward maps that pass an exhaustive
/// fault-tolerance certificate.
fn reduction_rules_certified() {
    let mut r = rng(0xacce97);
    let mut certified = 0usize;
    while certified < 200 {
        let c = random_complex(&mut r, 14);
        let Some((gauge, weight)) = (0..c.dim_c2())
            .map(|g| (g, c.d2().col(g).weight()))
            .find(|&(_, w)| w == 1 || w == 2)
        else {
            continue;
        };
        let (reduced, app) = if weight == 2 {
            apply_rule_a(&c, gauge).unwrap()
        } else {
            apply_rule_b(&c, gauge).unwrap()
        };
        let cert = certify_fault_tolerant(&app.forward, &app.backward, &c, &reduced, 16).unwrap();
        assert!(!cert.sampled, "expected an exhaustive certificate");
        assert_eq!(cert.dim_h1, c.homology_dimension());
        certified += 1;
    }
}

/// Criterion 3: the 4x4 Bacon-Shor complex reduces to two connected
/// components, each isomorphic to the Tanner graph of the 4-bit repetition
/// code, with distance 4 preserved.
fn bacon_shor_reduces_to_repetition_codes() {
    let c = subsystem_complex(&bacon_shor(4, 4));
    assert_eq!(c.distance(30).unwrap(), 4);

    let reduction = reduce_to_fixpoint(&c).unwrap();
    let components = reduction.complex.connected_components();
    assert_eq!(components.len(), 2);

    // Reference: 4 bits, 3 adjacent-pair checks, no gauge nodes.
    let reference = ChainComplex2::new(
        BitMatrix::zeros(4, 0),
        bits(&["1100", "0110", "0011"]),
        Vec::new(),
        (0..4)
            .map(|i| Label::new(format!("e{i}"), NodeKind::ErrorGeneric))
            .collect(),
        (0..3)
            .map(|i| Label::new(format!("c{i}"), NodeKind::Detector))
            .collect(),
    )
    .unwrap();

    for comp in &components {
        let sub = reduction.complex.subcomplex(comp);
        assert!(graph_isomorphic(&sub, &reference));
    }
    assert_eq!(reduction.complex.distance(30).unwrap(), 4);
}

/// Criterion 4: for a trivial circuit on `n` wires over `T` timesteps with
/// an [[n, k]] input group, the error space has dimension `2nT` and splits
/// into gauge directions, pure syndrome directions, and `2k` logical ones.
fn trivial_circuit_counting_identity() {
    for n in 1..=4usize {
        for cols in [0usize, 2, 4] {
            for k in 0..=n {
                let stabs: Vec<PauliOp> =
                    (0..n - k).map(|w| PauliOp::single_z(n, w)).collect();
                let circuit = CliffordCircuit::new(
                    n,
                    vec![Vec::new(); cols],
                    Vec::new(),
                    Vec::new(),
                    stabs,
                )
                .unwrap()
                .normalize();
                let t = circuit.t_max();
                let c = spacetime_complex(&circuit).unwrap().complex().clone();
                assert_eq!(c.dim_c1(), 2 * n * t);
                assert_eq!(c.homology_dimension(), 2 * k);
                assert_eq!(c.d2().rank(), 2 * n * (t - 1) + (n - k));
                assert_eq!(c.d1().rank(), n - k);
                assert_eq!(
                    c.d2().rank() + c.d1().rank() + c.homology_dimension(),
                    2 * n * t
                );
            }
        }
    }
}

/// Criterion 5: on random circuits, forward/backward propagations of
/// measured operators land in the gauge group whenever they commute with
/// every measurement they cross, and every derived stabilizer commutes
/// with the whole gauge group.
fn propagations_are_gauge_operators() {
    let mut r = rng(0x5bac1e);
    for _ in 0..100 {
        let circuit = random_circuit(&mut r, 4, 6);
        let sc = spacetime_complex(&circuit).unwrap();
        let gauge = sc.complex().d2().transpose();
        let n = circuit.n();

        let check = |op: &spacetime_forge::circuit::SpacetimeOperator| {
            if measurement_compatible(&circuit, op) {
                assert!(gauge.rowspace_contains(&op.symplectic()));
            }
        };
        for (col, elems) in circuit.columns().iter().enumerate() {
            let t = col + 1;
            for e in elems {
                let CircuitElement::MeasurePauli(q) = e else {
                    continue;
                };
                check(&circuit.spackle(q, t + 1).unwrap());
                check(&circuit.backle(q, t).unwrap());
            }
        }
        for &(wire, basis) in circuit.final_measurements() {
            let p = match basis {
                MeasBasis::X => PauliOp::single_x(n, wire),
                MeasBasis::Y => PauliOp::single_x(n, wire).mul(&PauliOp::single_z(n, wire)),
            };
            check(&circuit.spackle(&p, circuit.t_max()).unwrap());
            check(&circuit.backle(&p, circuit.t_max()).unwrap());
        }

        let stabilizers = sc.stabilizers();
        let omega_dot = |a: &BitVector, b: &BitVector| {
            let half = a.len() / 2;
            let mut acc = false;
            for i in 0..half {
                acc ^= a.get(i) & b.get(half + i);
                acc ^= a.get(half + i) & b.get(i);
            }
            acc
        };
        for s in 0..stabilizers.rows() {
            for g in 0..gauge.rows() {
                assert!(!omega_dot(&stabilizers.row(s), &gauge.row(g)));
            }
        }
    }
}

/// Criterion 6: the cluster-state complex of a random pattern is
/// equivalent to the spacetime complex of the pattern's circuit
/// realization.
fn cluster_complexes_match_realizations() {
    let mut r = rng(0xc1057e);
    for i in 0..50 {
        let p = random_pattern(&mut r, 10);
        let report = verify_equivalence_to_spacetime(&p, 24).unwrap();
        assert!(
            report.equivalent(),
            "pattern {i} not equivalent: {:?}",
            report.failures
        );
    }
}

/// The dimension of the detector subspace supported away from the
/// open boundaries (input and output wires) of a compiled pattern.
fn interior_detector_dimension(p: &MbqcPattern) -> usize {
    let csc = cluster_state_complex(p).unwrap();
    let n1 = csc.g().cols();
    let interior: Vec<BitVector> = csc
        .error_nodes()
        .iter()
        .enumerate()
        .filter(|(_, e)| match e.kind {
            ErrorNodeKind::InputX | ErrorNodeKind::OutputX => false,
            ErrorNodeKind::Z => !p.is_input(e.wire) && !p.is_output(e.wire),
        })
        .map(|(i, _)| BitVector::from_indices(n1, &[i]))
        .collect();
    let interior = BitMatrix::from_rows(&interior, n1);
    csc.h().subspace_intersection(&interior).unwrap().rank()
}

/// Criterion 7: the compiler turns a corpus of circuits into verified
/// measurement patterns; the transversal-S example additionally yields the
/// expected two interior detectors.
fn compiler_verifies_its_corpus() {
    let sources = [
        "WIRES 1\nH 0\n",
        "WIRES 1\nHS 0\n",
        "WIRES 2\nCP 0 _X\n",
        "WIRES 2\nCP 0 _Y\n",
        "WIRES 2\n",
        "WIRES 3\nINPUT ZZ_\nPLUS 2\nCP 2 ZZ_\nMX 2\n",
        TRANSVERSAL_S,
    ];
    for src in sources {
        let circuit = parse_circuit(src).unwrap();
        let result = compile(&circuit, true, 24).unwrap();
        let report = result.report.expect("verification requested");
        assert!(
            report.equivalent(),
            "compile of {src:?} failed verification: {:?}",
            report.failures
        );
        if src == TRANSVERSAL_S {
            assert_eq!(result.pattern.n(), 14);
            assert_eq!(result.pattern.y_mask().weight(), 2);
            assert_eq!(interior_detector_dimension(&result.pattern), 2);
        }
    }
}

/// Criterion 8: foliation goldens — exact graphs for two single-round
/// foliations and detector counts for two measurement schedules.
fn foliation_matches_goldens() {
    let expected_graph = |n: usize, edges: &[(usize, usize)]| {
        let mut a = BitMatrix::zeros(n, n);
        for &(i, j) in edges {
            a.set(i, j, true);
            a.set(j, i, true);
        }
        a
    };

    // One ZZ check over two qubits, one round: two three-node data chains
    // and one ancilla coupled to the first layer.
    let lc = foliate_css(&BitMatrix::zeros(0, 2), &bits(&["11"]), 1).unwrap();
    assert_eq!(lc.pattern().n(), 7);
    assert_eq!(lc.layer_count(), 5);
    assert_eq!(lc.detector_count(), 2);
    assert_eq!(lc.pattern().inputs().collect::<Vec<_>>(), vec![0, 1]);
    assert_eq!(lc.pattern().outputs().collect::<Vec<_>>(), vec![4, 5]);
    assert_eq!(
        lc.pattern().adjacency(),
        &expected_graph(7, &[(0, 2), (2, 4), (1, 3), (3, 5), (0, 6), (1, 6)])
    );

    // The XZ/ZX code, one round: the two ancillas additionally share an
    // edge because the generators anticommute factor-wise.
    let code = StabilizerCode::new(
        2,
        &[PauliOp::parse("XZ").unwrap(), PauliOp::parse("ZX").unwrap()],
    )
    .unwrap();
    let lc = foliate_stabilizer(&code, 1).unwrap();
    assert_eq!(lc.pattern().n(), 8);
    assert!(lc.pattern().y_mask().is_zero());
    assert_eq!(
        lc.pattern().adjacency(),
        &expected_graph(
            8,
            &[
                (0, 2),
                (2, 4),
                (1, 3),
                (3, 5),
                (1, 6),
                (2, 6),
                (0, 7),
                (3, 7),
                (6, 7),
            ]
        )
    );

    // Alternating XXXX/ZZZZ rounds on four qubits.
    let s = DynamicalSchedule::parse("M XXXX\nROUND\nM ZZZZ\nROUND\nM XXXX\nROUND\nM ZZZZ\n")
        .unwrap();
    assert_eq!(foliate_dynamical(&s).unwrap().detector_count(), 6);

    // A schedule with a YYYY round sandwiched between Z rounds.
    let s = DynamicalSchedule::parse(
        "INPUT XXXX\nINPUT ZZZZ\nM XXXX\nROUND\nM ZZZZ\nROUND\nM YYYY\nROUND\nM ZZZZ\n",
    )
    .unwrap();
    let lc = foliate_dynamical(&s).unwrap();
    assert_eq!(lc.detector_count(), 6);
    assert!(lc.pattern().y_mask().is_zero());
}

/// Criterion 9: a SWAP built from three CNOTs leaves irreducible
/// high-weight gauge structure behind, while the same permutation applied
/// as a wire relabeling reduces away completely.
fn swap_negative_control() {
    let three_cnots = parse_circuit(SWAP_THREE_CNOTS).unwrap();
    let result = compile(&three_cnots, false, 24).unwrap();
    let csc = cluster_state_complex(&result.pattern).unwrap();
    let fixpoint = reduce_to_fixpoint(csc.complex()).unwrap().complex;
    assert!(fixpoint.dim_c2() > 0);
    let max_weight = (0..fixpoint.dim_c2())
        .map(|g| fixpoint.d2().col(g).weight())
        .max()
        .unwrap();
    assert!(max_weight >= 3, "expected irreducible gauge columns");

    // Relabeling wires is a no-op circuit; nothing survives reduction.
    let relabel = parse_circuit("WIRES 2\n").unwrap();
    let result = compile(&relabel, false, 24).unwrap();
    let csc = cluster_state_complex(&result.pattern).unwrap();
    let fixpoint = reduce_to_fixpoint(csc.complex()).unwrap().complex;
    assert_eq!(fixpoint.dim_c2(), 0);
}

/// Criterion 10: distance and minimum-weight decoding agree with brute
/// force on every corpus complex small enough to enumerate.
fn decoding_matches_brute_force() {
    let mut r = rng(0xdec0de);
    let mut checked = 0usize;
    for c in corpus() {
        if c.dim_c1() > 16 {
            continue;
        }
        checked += 1;
        match naive_distance(&c) {
            Some(d) => assert_eq!(c.distance(24).unwrap(), d),
            None => assert!(c.distance(24).is_err()),
        }
        let mut syndromes = all_syndromes(&c);
        if syndromes.len() > 64 {
            // Too many to enumerate; spot-check syndromes of random errors.
            syndromes = (0..32)
                .map(|_| {
                    let mut e = BitVector::zeros(c.dim_c1());
                    for i in 0..e.len() {
                        if r.gen_bool(0.5) {
                            e.flip(i);
                        }
                    }
                    c.d1().mul_vec(&e).unwrap()
                })
                .collect();
        }
        for s in &syndromes {
            let (w, witness) = c.mwd(s, 24).unwrap();
            let (nw, nwitness) = naive_mwd(&c, s).unwrap();
            assert_eq!((w, &witness), (nw, &nwitness));
        }
    }
    assert!(checked >= 8, "too few small complexes: {checked}");
}

#[test]
fn acceptance() {
    let checks: &[(&str, fn())] = &[
        ("chain condition across all constructors", chain_condition_everywhere),
        ("reduction rules certified fault-tolerant", reduction_rules_certified),
        ("Bacon-Shor 4x4 reduces to repetition codes", bacon_shor_reduces_to_repetition_codes),
        ("trivial-circuit counting identity", trivial_circuit_counting_identity),
        ("propagated operators are gauge operators", propagations_are_gauge_operators),
        ("cluster complexes match realizations", cluster_complexes_match_realizations),
        ("compiler verifies its corpus", compiler_verifies_its_corpus),
        ("foliation matches goldens", foliation_matches_goldens),
        ("three-CNOT SWAP negative control", swap_negative_control),
        ("decoding matches brute force", decoding_matches_brute_force),
    ];

    let mut failures = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let status = if outcome.is_ok() { "pass" } else { "FAIL" };
        println!("criterion {:2} ({name}): {status}", i + 1);
        if let Err(e) = outcome {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".to_string());
            failures.push(format!("criterion {} ({name}): {msg}", i + 1));
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}
