//! Compilation of Clifford circuits into MBQC patterns.
//!
//! The pipeline lowers every single-qubit gate to `H`/`HS`, expands
//! controlled-Pauli gates into CZ conjugated by Hadamards, cancels `H·H`
//! pairs, inserts Hadamard pairs wherever two CZ networks would otherwise
//! touch (Hadamard separation), and finally sweeps left-to-right turning
//! each `H`/`HS` into its teleportation form while merging every CZ network
//! into a single cluster-state graph. Each step is a recorded, equivalence-
//! preserving rewrite.

use crate::circuit::{CircuitElement, CircuitError, CliffordCircuit, MeasBasis};
use crate::gf2::{BitMatrix, BitVector};
use crate::mbqc::{MbqcError, MbqcPattern};
use crate::pauli::PauliOp;
use serde::Serialize;
use thiserror::Error;

/// Errors from the compilation pipeline.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("unsupported element in source circuit: {0}")]
    Grammar(String),
    #[error("internal invariant failure during merge: {0}")]
    Merge(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Mbqc(#[from] MbqcError),
    #[error("verification failed: {0:?}")]
    Verification(Vec<String>),
}

/// The equivalence lemma justifying a rewrite step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LemmaTag {
    HadamardSquare,
    PushHAway,
    HCzSandwich,
    SMerge,
    CtrlPauliLower,
    MbqcH,
    MbqcHS,
    HadamardSeparate,
    MergeRight,
    CzCzMerge,
    MergeLeft,
}

/// One recorded rewrite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RewriteStep {
    pub lemma: LemmaTag,
    /// Human-readable location/description of the rewrite.
    pub description: String,
}

/// Start and end pattern nodes of one original circuit wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WireEnds {
    pub wire: usize,
    pub start_node: usize,
    pub end_node: usize,
}

/// Output of [`compile`].
#[derive(Clone, Debug)]
pub struct CompilationResult {
    pub pattern: MbqcPattern,
    pub trace: Vec<RewriteStep>,
    pub wire_map: Vec<WireEnds>,
    /// Filled when compiled with verification enabled.
    pub report: Option<crate::mbqc::EquivalenceReport>,
}

type Columns = Vec<Vec<CircuitElement>>;

fn is_network(e: &CircuitElement) -> bool {
    matches!(e, CircuitElement::Cz(..) | CircuitElement::CzNetworkBox { .. })
}

fn touches(e: &CircuitElement, wire: usize) -> bool {
    e.support().contains(&wire)
}

/// Positions `(column, index)` of elements on `wire`, in time order.
fn wire_timeline(columns: &Columns, wire: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (c, col) in columns.iter().enumerate() {
        for (i, e) in col.iter().enumerate() {
            if touches(e, wire) {
                out.push((c, i));
            }
        }
    }
    out
}

/// Rejects anything outside the supported source grammar.
fn check_grammar(c: &CliffordCircuit) -> Result<(), CompileError> {
    for col in c.columns() {
        for e in col {
            match e {
                CircuitElement::H(_)
                | CircuitElement::S(_)
                | CircuitElement::Hs(_)
                | CircuitElement::Pauli(_)
                | CircuitElement::ControlledPauli { .. }
                | CircuitElement::Cz(..)
                | CircuitElement::CzNetworkBox { .. }
                | CircuitElement::Identity(_) => {}
                CircuitElement::MeasurePauli(p) => {
                    return Err(CompileError::Grammar(format!(
                        "mid-circuit measurement M[{p}] (measurements must be final single-qubit X/Y)"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Lowers every single-qubit gate to `H` or `HS`: Pauli gates are dropped;
/// `S` merges with a following `H` into `HS`, or expands to `HS·H`.
fn lower_single_qubit(columns: &mut Columns, trace: &mut Vec<RewriteStep>) {
    // Drop Pauli gates (they only change signs, which are modded out).
    for (c, col) in columns.iter_mut().enumerate() {
        let before = col.len();
        col.retain(|e| !matches!(e, CircuitElement::Pauli(_) | CircuitElement::Identity(_)));
        for _ in col.len()..before {
            trace.push(RewriteStep {
                lemma: LemmaTag::PushHAway,
                description: format!("drop Pauli/identity gate in column {c}"),
            });
        }
    }
    // Rewrite every S, scanning from the left after each change.
    'outer: loop {
        for c in 0..columns.len() {
            for i in 0..columns[c].len() {
                let CircuitElement::S(w) = columns[c][i] else {
                    continue;
                };
                // Find the next element on this wire.
                let next = wire_timeline(columns, w)
                    .into_iter()
                    .find(|&(cc, ii)| cc > c || (cc == c && ii > i));
                if let Some((cc, ii)) = next {
                    if matches!(columns[cc][ii], CircuitElement::H(_)) {
                        columns[c][i] = CircuitElement::Hs(w);
                        columns[cc].remove(ii);
                        trace.push(RewriteStep {
                            lemma: LemmaTag::SMerge,
                            description: format!("merge S and H on wire {w} into HS"),
                        });
                        continue 'outer;
                    }
                }
                // S ~ S·H·H ~ HS·H: replace by HS and insert H just after.
                columns[c][i] = CircuitElement::Hs(w);
                columns.insert(c + 1, vec![CircuitElement::H(w)]);
                trace.push(RewriteStep {
                    lemma: LemmaTag::HadamardSquare,
                    description: format!("expand lone S on wire {w} to HS·H"),
                });
                continue 'outer;
            }
        }
        break;
    }
}

/// Expands every controlled-Pauli into Hadamards and CZ gates:
/// `X` targets get `H·CZ·H`, `Z` targets a bare `CZ`, `Y` targets
/// `H·CZ·H·CZ`.
fn lower_controlled_pauli(columns: &mut Columns, trace: &mut Vec<RewriteStep>) {
    'outer: loop {
        for c in 0..columns.len() {
            for i in 0..columns[c].len() {
                let CircuitElement::ControlledPauli { control, target } = columns[c][i].clone()
                else {
                    continue;
                };
                columns[c].remove(i);
                let rest: Vec<CircuitElement> = columns[c].drain(..).collect();
                let hadamard_targets: Vec<usize> = target
                    .support()
                    .into_iter()
                    .filter(|&j| target.x_part().get(j))
                    .collect();
                let y_targets: Vec<usize> = target
                    .support()
                    .into_iter()
                    .filter(|&j| target.x_part().get(j) && target.z_part().get(j))
                    .collect();
                let mut insert = Vec::new();
                if !hadamard_targets.is_empty() {
                    insert.push(hadamard_targets.iter().map(|&j| CircuitElement::H(j)).collect());
                }
                let mut cz_col: Vec<CircuitElement> = target
                    .support()
                    .into_iter()
                    .map(|j| CircuitElement::Cz(control, j))
                    .collect();
                cz_col.extend(rest);
                insert.push(cz_col);
                if !hadamard_targets.is_empty() {
                    insert.push(hadamard_targets.iter().map(|&j| CircuitElement::H(j)).collect());
                }
                if !y_targets.is_empty() {
                    insert.push(
                        y_targets
                            .iter()
                            .map(|&j| CircuitElement::Cz(control, j))
                            .collect(),
                    );
                }
                columns.remove(c);
                for (k, col) in insert.into_iter().enumerate() {
                    columns.insert(c + k, col);
                }
                trace.push(RewriteStep {
                    lemma: LemmaTag::CtrlPauliLower,
                    description: format!(
                        "lower controlled-{target} with control {control} to CZ network"
                    ),
                });
                continue 'outer;
            }
        }
        break;
    }
}

/// Cancels adjacent `H·H` pairs on each wire.
fn peephole_hh(columns: &mut Columns, trace: &mut Vec<RewriteStep>) {
    'outer: loop {
        let n_wires = columns
            .iter()
            .flatten()
            .flat_map(|e| e.support())
            .max()
            .map_or(0, |m| m + 1);
        for w in 0..n_wires {
            let timeline = wire_timeline(columns, w);
            for pair in timeline.windows(2) {
                let (c1, i1) = pair[0];
                let (c2, i2) = pair[1];
                if matches!(columns[c1][i1], CircuitElement::H(_))
                    && matches!(columns[c2][i2], CircuitElement::H(_))
                {
                    // Remove the later one first to keep indices valid.
                    columns[c2].remove(i2);
                    columns[c1].remove(i1);
                    columns.retain(|col| !col.is_empty());
                    trace.push(RewriteStep {
                        lemma: LemmaTag::HadamardSquare,
                        description: format!("cancel H·H pair on wire {w}"),
                    });
                    continue 'outer;
                }
            }
        }
        break;
    }
}

/// Inserts `H·H` pairs so that no two CZ networks touch on a shared wire
/// and no `HS` immediately follows a network.
fn hadamard_separate(columns: &mut Columns, trace: &mut Vec<RewriteStep>) {
    'outer: loop {
        let n_wires = columns
            .iter()
            .flatten()
            .flat_map(|e| e.support())
            .max()
            .map_or(0, |m| m + 1);
        for w in 0..n_wires {
            let timeline = wire_timeline(columns, w);
            for pair in timeline.windows(2) {
                let (c1, i1) = pair[0];
                let (c2, i2) = pair[1];
                let first_is_network = is_network(&columns[c1][i1]);
                let second = &columns[c2][i2];
                // CZ gates sharing a column form one jointly-applied
                // network; only cross-column contact needs separation.
                let violation = first_is_network
                    && ((is_network(second) && c2 > c1)
                        || matches!(second, CircuitElement::Hs(_)));
                if violation {
                    columns.insert(c2, vec![CircuitElement::H(w)]);
                    columns.insert(c2, vec![CircuitElement::H(w)]);
                    trace.push(RewriteStep {
                        lemma: LemmaTag::HadamardSeparate,
                        description: format!("insert H·H on wire {w} before column {c2}"),
                    });
                    continue 'outer;
                }
            }
        }
        break;
    }
}

/// Left-to-right sweep: every `H`/`HS` becomes a teleportation onto a fresh
/// node, every CZ network toggles edges between the current nodes, final
/// measurements close the surviving wires.
fn merge_all(
    n: usize,
    columns: &Columns,
    plus_inits: &[usize],
    final_meas: &[(usize, MeasBasis)],
    input_stabilizers: &[PauliOp],
    trace: &mut Vec<RewriteStep>,
) -> Result<(MbqcPattern, Vec<WireEnds>), CompileError> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut node_count = n;
    // Measurement basis of consumed nodes.
    let mut meas: Vec<Option<MeasBasis>> = vec![None; n];
    let toggle_edge = |edges: &mut Vec<(usize, usize)>, a: usize, b: usize| {
        let key = (a.min(b), a.max(b));
        if let Some(pos) = edges.iter().position(|&e| e == key) {
            edges.remove(pos);
        } else {
            edges.push(key);
        }
    };
    for col in columns {
        for e in col {
            match e {
                CircuitElement::H(w) | CircuitElement::Hs(w) => {
                    let old = cur[*w];
                    let fresh = node_count;
                    node_count += 1;
                    meas.push(None);
                    toggle_edge(&mut edges, old, fresh);
                    let basis = if matches!(e, CircuitElement::H(_)) {
                        MeasBasis::X
                    } else {
                        MeasBasis::Y
                    };
                    meas[old] = Some(basis);
                    cur[*w] = fresh;
                    trace.push(RewriteStep {
                        lemma: if matches!(e, CircuitElement::H(_)) {
                            LemmaTag::MbqcH
                        } else {
                            LemmaTag::MbqcHS
                        },
                        description: format!(
                            "teleport wire {w}: node {old} measured, new node {fresh}"
                        ),
                    });
                }
                CircuitElement::Cz(a, b) => {
                    toggle_edge(&mut edges, cur[*a], cur[*b]);
                    trace.push(RewriteStep {
                        lemma: LemmaTag::CzCzMerge,
                        description: format!("merge CZ({a},{b}) into the cluster graph"),
                    });
                }
                CircuitElement::CzNetworkBox { members, adjacency } => {
                    for (pa, &wa) in members.iter().enumerate() {
                        for (pb, &wb) in members.iter().enumerate().skip(pa + 1) {
                            if adjacency.get(pa, pb) {
                                toggle_edge(&mut edges, cur[wa], cur[wb]);
                            }
                        }
                    }
                    trace.push(RewriteStep {
                        lemma: LemmaTag::CzCzMerge,
                        description: "merge CZ network into the cluster graph".to_string(),
                    });
                }
                CircuitElement::Identity(_) => {}
                other => {
                    return Err(CompileError::Merge(format!(
                        "residual element {other:?} after lowering"
                    )));
                }
            }
        }
    }
    for &(w, basis) in final_meas {
        if meas[cur[w]].is_some() {
            return Err(CompileError::Merge(format!(
                "wire {w} measured twice at the end"
            )));
        }
        meas[cur[w]] = Some(basis);
    }
    let outputs: Vec<usize> = (0..n)
        .filter(|&w| final_meas.iter().all(|&(mw, _)| mw != w))
        .map(|w| cur[w])
        .collect();
    let inputs: Vec<usize> = (0..n).filter(|w| !plus_inits.contains(w)).collect();
    let mut a = BitMatrix::zeros(node_count, node_count);
    for (u, v) in edges {
        a.set(u, v, true);
        a.set(v, u, true);
    }
    let mut b = BitVector::zeros(node_count);
    for (node, m) in meas.iter().enumerate() {
        if *m == Some(MeasBasis::Y) {
            b.set(node, true);
        }
    }
    let stabilizers: Vec<PauliOp> = input_stabilizers
        .iter()
        .map(|s| {
            let mut x = BitVector::zeros(node_count);
            let mut z = BitVector::zeros(node_count);
            for w in s.support() {
                x.set(w, s.x_part().get(w));
                z.set(w, s.z_part().get(w));
            }
            PauliOp::from_parts(x, z).expect("equal lengths")
        })
        .collect();
    let wire_map: Vec<WireEnds> = (0..n)
        .map(|w| WireEnds {
            wire: w,
            start_node: w,
            end_node: cur[w],
        })
        .collect();
    let pattern = MbqcPattern::new(a, inputs, outputs, b, stabilizers)?;
    Ok((pattern, wire_map))
}

/// Runs the full pipeline on a source circuit. With `verify`, the
/// resulting pattern's cluster-state complex is checked against the
/// spacetime complex of its own realization (homology dimension, distance,
/// detector dimension), and the homology dimension is compared with the
/// source circuit's.
pub fn compile(
    source: &CliffordCircuit,
    verify: bool,
    cap: usize,
) -> Result<CompilationResult, CompileError> {
    check_grammar(source)?;
    let mut columns: Columns = source.columns().to_vec();
    let mut trace = Vec::new();
    lower_single_qubit(&mut columns, &mut trace);
    lower_controlled_pauli(&mut columns, &mut trace);
    peephole_hh(&mut columns, &mut trace);
    hadamard_separate(&mut columns, &mut trace);
    let plus_inits: Vec<usize> = source.plus_inits().collect();
    let (pattern, wire_map) = merge_all(
        source.n(),
        &columns,
        &plus_inits,
        source.final_measurements(),
        source.input_stabilizers(),
        &mut trace,
    )?;
    let report = if verify {
        let report = crate::mbqc::verify_equivalence_to_spacetime(&pattern, cap)?;
        let src_complex = crate::circuit::spacetime_complex(&source.clone().normalize())?;
        let src_dim = src_complex.complex().homology_dimension();
        let mut failures = report.failures.clone();
        if src_dim != report.dim_h1.1 {
            failures.push(format!(
                "source dim H1 {} differs from pattern dim H1 {}",
                src_dim, report.dim_h1.1
            ));
        }
        if !failures.is_empty() {
            return Err(CompileError::Verification(failures));
        }
        Some(report)
    } else {
        None
    };
    Ok(CompilationResult {
        pattern,
        trace,
        wire_map,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    #[test]
    fn lone_h_compiles_to_two_node_pattern() {
        let c = parse_circuit("WIRES 1\nH 0\n").unwrap();
        let result = compile(&c, true, 24).unwrap();
        assert_eq!(result.pattern.n(), 2);
        assert!(result.pattern.is_input(0));
        assert!(result.pattern.is_output(1));
        assert!(result.pattern.y_mask().is_zero());
    }

    #[test]
    fn lone_hs_compiles_with_y_measurement_on_first_node() {
        let c = parse_circuit("WIRES 1\nHS 0\n").unwrap();
        let result = compile(&c, true, 24).unwrap();
        assert_eq!(result.pattern.n(), 2);
        assert!(result.pattern.y_mask().get(0));
        assert!(!result.pattern.y_mask().get(1));
    }

    #[test]
    fn lone_s_expands_to_hs_h() {
        let c = parse_circuit("WIRES 1\nS 0\n").unwrap();
        let result = compile(&c, true, 24).unwrap();
        // HS then H: three nodes, first measured Y, second measured X.
        assert_eq!(result.pattern.n(), 3);
        assert!(result.pattern.y_mask().get(0));
    }

    #[test]
    fn cx_compiles_and_verifies() {
        let c = parse_circuit("WIRES 2\nCP 0 _X\n").unwrap();
        let result = compile(&c, true, 24).unwrap();
        assert!(result.report.unwrap().equivalent());
    }

    #[test]
    fn mid_circuit_measurement_rejected() {
        let c = parse_circuit("WIRES 2\nMPP XX\nTICK\nH 0\n").unwrap();
        assert!(matches!(compile(&c, false, 24), Err(CompileError::Grammar(_))));
    }
}
