//! Measurement-based (MBQC) patterns, their circuit realizations, and the
//! cluster-state complex with its compressed (co-)representations.
//!
//! A pattern is a cluster-state graph with designated input and output
//! wires, a Y-measurement mask, and an input stabilizer group. Its circuit
//! realization is a three-timestep circuit (`|+⟩` inits, one atomic CZ
//! network, final X/Y measurements); the cluster-state complex encodes the
//! same decoding problem directly on the graph.

use crate::chainmap::reduce_to_fixpoint;
use crate::circuit::{
    spacetime_complex, CircuitElement, CircuitError, CliffordCircuit, MeasBasis,
};
use crate::complex::{ChainComplex2, ComplexError, Label, NodeKind};
use crate::gf2::{BitMatrix, BitVector, Gf2Error};
use crate::pauli::PauliOp;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

/// Errors from pattern validation, parsing, and equivalence checking.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MbqcError {
    #[error("adjacency matrix must be square and symmetric with zero diagonal")]
    BadAdjacency,
    #[error("wire index {wire} out of range for {n} wires")]
    WireOutOfRange { wire: usize, n: usize },
    #[error("Y-measurement mask must be zero on output wires")]
    YMeasurementOnOutput,
    #[error("input stabilizers must be supported on input wires and commute")]
    BadInputStabilizers,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("chain reduction failed: {0}")]
    Reduction(String),
    #[error("detector rows must lie in and span the computed detector space")]
    DetectorSpan,
}

/// A Clifford MBQC pattern: graph adjacency `A`, input/output wire sets,
/// Y-measurement mask `b`, and input stabilizers (full-length operators
/// supported on the input wires).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MbqcPattern {
    a: BitMatrix,
    inputs: BTreeSet<usize>,
    outputs: BTreeSet<usize>,
    b: BitVector,
    input_stabilizers: Vec<PauliOp>,
}

impl MbqcPattern {
    pub fn new(
        a: BitMatrix,
        inputs: impl IntoIterator<Item = usize>,
        outputs: impl IntoIterator<Item = usize>,
        b: BitVector,
        input_stabilizers: Vec<PauliOp>,
    ) -> Result<Self, MbqcError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(MbqcError::BadAdjacency);
        }
        for i in 0..n {
            if a.get(i, i) {
                return Err(MbqcError::BadAdjacency);
            }
            for j in 0..i {
                if a.get(i, j) != a.get(j, i) {
                    return Err(MbqcError::BadAdjacency);
                }
            }
        }
        if b.len() != n {
            return Err(MbqcError::BadAdjacency);
        }
        let inputs: BTreeSet<usize> = inputs.into_iter().collect();
        let outputs: BTreeSet<usize> = outputs.into_iter().collect();
        for &w in inputs.iter().chain(outputs.iter()) {
            if w >= n {
                return Err(MbqcError::WireOutOfRange { wire: w, n });
            }
        }
        for &w in &outputs {
            if b.get(w) {
                return Err(MbqcError::YMeasurementOnOutput);
            }
        }
        for s in &input_stabilizers {
            if s.len() != n || s.support().iter().any(|w| !inputs.contains(w)) {
                return Err(MbqcError::BadInputStabilizers);
            }
        }
        for a_idx in 0..input_stabilizers.len() {
            for b_idx in a_idx + 1..input_stabilizers.len() {
                if !input_stabilizers[a_idx].commutes(&input_stabilizers[b_idx]) {
                    return Err(MbqcError::BadInputStabilizers);
                }
            }
        }
        Ok(MbqcPattern {
            a,
            inputs,
            outputs,
            b,
            input_stabilizers,
        })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.a
    }

    pub fn inputs(&self) -> impl Iterator<Item = usize> + '_ {
        self.inputs.iter().copied()
    }

    pub fn outputs(&self) -> impl Iterator<Item = usize> + '_ {
        self.outputs.iter().copied()
    }

    pub fn is_input(&self, w: usize) -> bool {
        self.inputs.contains(&w)
    }

    pub fn is_output(&self, w: usize) -> bool {
        self.outputs.contains(&w)
    }

    /// The Y-measurement mask (1 = measured in the Y basis).
    pub fn y_mask(&self) -> &BitVector {
        &self.b
    }

    pub fn input_stabilizers(&self) -> &[PauliOp] {
        &self.input_stabilizers
    }

    /// Serializes to the pattern text format accepted by [`parse_pattern`].
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let n = self.n();
        let mut out = String::new();
        let _ = writeln!(out, "NODES {n}");
        for i in 0..n {
            for j in i + 1..n {
                if self.a.get(i, j) {
                    let _ = writeln!(out, "EDGE {i} {j}");
                }
            }
        }
        for &w in &self.inputs {
            let _ = writeln!(out, "INPUT {w}");
        }
        for &w in &self.outputs {
            let _ = writeln!(out, "OUTPUT {w}");
        }
        for w in 0..n {
            if self.b.get(w) {
                let _ = writeln!(out, "YMEAS {w}");
            }
        }
        let input_list: Vec<usize> = self.inputs.iter().copied().collect();
        for s in &self.input_stabilizers {
            let mut x = BitVector::zeros(input_list.len());
            let mut z = BitVector::zeros(input_list.len());
            for (pos, &w) in input_list.iter().enumerate() {
                x.set(pos, s.x_part().get(w));
                z.set(pos, s.z_part().get(w));
            }
            let restricted = PauliOp::from_parts(x, z).expect("equal lengths");
            let _ = writeln!(out, "STAB {restricted}");
        }
        out
    }
}

/// Realizes a pattern as a three-timestep circuit: `|+⟩` inits on
/// non-input wires, one atomic CZ network from the adjacency, an identity
/// column, and final X/Y measurements on non-output wires.
pub fn realize_circuit(p: &MbqcPattern) -> Result<CliffordCircuit, MbqcError> {
    let n = p.n();
    let members: Vec<usize> = (0..n).collect();
    let network = CircuitElement::CzNetworkBox {
        members,
        adjacency: p.a.clone(),
    };
    let columns = vec![vec![network], Vec::new()];
    let plus_inits: Vec<usize> = (0..n).filter(|w| !p.is_input(*w)).collect();
    let final_meas: Vec<(usize, MeasBasis)> = (0..n)
        .filter(|w| !p.is_output(*w))
        .map(|w| {
            (
                w,
                if p.b.get(w) {
                    MeasBasis::Y
                } else {
                    MeasBasis::X
                },
            )
        })
        .collect();
    Ok(CliffordCircuit::new(
        n,
        columns,
        plus_inits,
        final_meas,
        p.input_stabilizers.clone(),
    )?)
}

/// Kind of an error node in the cluster-state complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorNodeKind {
    /// Virtual X node on an input wire (error before the CZ network).
    InputX,
    /// Virtual X node on an output wire (error after the CZ network).
    OutputX,
    /// Physical Z node of a wire.
    Z,
}

/// One error node: its kind and the wire it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ErrorNode {
    pub kind: ErrorNodeKind,
    pub wire: usize,
}

/// The cluster-state complex of a pattern, plus the raw `G`/`H` matrices
/// and node metadata used by the compressed representations.
#[derive(Clone, Debug)]
pub struct ClusterStateComplex {
    complex: ChainComplex2,
    g: BitMatrix,
    h: BitMatrix,
    /// Error-node metadata, one entry per C1 basis element.
    error_nodes: Vec<ErrorNode>,
    n_s: usize,
    n_i: usize,
    n_o: usize,
}

impl ClusterStateComplex {
    pub fn complex(&self) -> &ChainComplex2 {
        &self.complex
    }

    /// Gauge biadjacency matrix `G` (rows: stabilizer gauges then wire
    /// gauges; columns: error nodes).
    pub fn g(&self) -> &BitMatrix {
        &self.g
    }

    /// Detector matrix `H` (rowspace = detector space).
    pub fn h(&self) -> &BitMatrix {
        &self.h
    }

    pub fn error_nodes(&self) -> &[ErrorNode] {
        &self.error_nodes
    }

    /// Number of detectors.
    pub fn detector_count(&self) -> usize {
        self.h.rows()
    }

    pub fn stabilizer_count(&self) -> usize {
        self.n_s
    }

    /// Rebuilds the complex with an explicit set of detector rows.
    ///
    /// The rows must lie in the computed detector space and span all of it;
    /// this lets callers install a structured detector basis (for example
    /// one detector per repeated measurement) in place of the generic one.
    pub fn with_detectors(&self, rows: &[BitVector]) -> Result<Self, MbqcError> {
        let n1 = self.g.cols();
        for row in rows {
            if row.len() != n1 || !self.h.rowspace_contains(row) {
                return Err(MbqcError::DetectorSpan);
            }
        }
        let new_h = BitMatrix::from_rows(rows, n1);
        if new_h.rank() != self.h.rank() {
            return Err(MbqcError::DetectorSpan);
        }
        let labels0: Vec<Label> = (0..new_h.rows())
            .map(|k| Label::new(format!("d{k}"), NodeKind::Detector))
            .collect();
        let complex = ChainComplex2::new(
            self.g.transpose(),
            new_h.clone(),
            self.complex.labels2().to_vec(),
            self.complex.labels1().to_vec(),
            labels0,
        )?;
        Ok(ClusterStateComplex {
            complex,
            g: self.g.clone(),
            h: new_h,
            error_nodes: self.error_nodes.clone(),
            n_s: self.n_s,
            n_i: self.n_i,
            n_o: self.n_o,
        })
    }
}

struct NodeIndex {
    /// For each wire: column of its virtual input X node, if any.
    input_x: Vec<Option<usize>>,
    /// For each wire: column of its virtual output X node, if any.
    output_x: Vec<Option<usize>>,
    /// For each wire: column of its physical Z node.
    z: Vec<usize>,
    n1: usize,
}

fn build_node_index(p: &MbqcPattern) -> NodeIndex {
    let n = p.n();
    let i_not_o: Vec<usize> = (0..n).filter(|&w| p.is_input(w) && !p.is_output(w)).collect();
    let io: Vec<usize> = (0..n).filter(|&w| p.is_input(w) && p.is_output(w)).collect();
    let o_not_i: Vec<usize> = (0..n).filter(|&w| !p.is_input(w) && p.is_output(w)).collect();
    let mut input_x = vec![None; n];
    let mut output_x = vec![None; n];
    let mut z = vec![0; n];
    let mut col = 0;
    // Column blocks: input X (I\O), input X (I∩O), output X (O\I),
    // output X (I∩O), then Z nodes of input wires, then the rest.
    for &w in &i_not_o {
        input_x[w] = Some(col);
        col += 1;
    }
    for &w in &io {
        input_x[w] = Some(col);
        col += 1;
    }
    for &w in &o_not_i {
        output_x[w] = Some(col);
        col += 1;
    }
    for &w in &io {
        output_x[w] = Some(col);
        col += 1;
    }
    for w in 0..n {
        if p.is_input(w) {
            z[w] = col;
            col += 1;
        }
    }
    for w in 0..n {
        if !p.is_input(w) {
            z[w] = col;
            col += 1;
        }
    }
    NodeIndex {
        input_x,
        output_x,
        z,
        n1: col,
    }
}

/// Builds the cluster-state complex of a pattern.
///
/// Gauge nodes (stored as C2): one per input stabilizer, then one per wire.
/// Error nodes (C1): virtual X nodes for input and output wires (two
/// distinct nodes for wires that are both), then physical Z nodes.
/// Detectors (C0): a basis of the kernel vectors of `G` whose output
/// restriction vanishes or whose input restriction lies in the stabilizer
/// group (output-free detectors listed first).
pub fn cluster_state_complex(p: &MbqcPattern) -> Result<ClusterStateComplex, MbqcError> {
    let n = p.n();
    let idx = build_node_index(p);
    let n_s = p.input_stabilizers.len();
    let n_i = p.inputs.len();
    let n_o = p.outputs.len();
    let n1 = idx.n1;
    debug_assert_eq!(n1, n + n_i + n_o);

    // Gauge rows: stabilizers first, then wires ordered I\O, O\I, I∩O,
    // neither (matching the block structure of G).
    let mut wire_rows: Vec<usize> = Vec::with_capacity(n);
    wire_rows.extend((0..n).filter(|&w| p.is_input(w) && !p.is_output(w)));
    wire_rows.extend((0..n).filter(|&w| !p.is_input(w) && p.is_output(w)));
    wire_rows.extend((0..n).filter(|&w| p.is_input(w) && p.is_output(w)));
    wire_rows.extend((0..n).filter(|&w| !p.is_input(w) && !p.is_output(w)));

    let mut g = BitMatrix::zeros(n_s + n, n1);
    for (row, s) in p.input_stabilizers.iter().enumerate() {
        for w in s.support() {
            if s.x_part().get(w) {
                g.set(row, idx.input_x[w].expect("stabilizer on input wire"), true);
            }
            if s.z_part().get(w) {
                g.set(row, idx.z[w], true);
            }
        }
    }
    for (pos, &w) in wire_rows.iter().enumerate() {
        let row = n_s + pos;
        if let Some(c) = idx.input_x[w] {
            g.set(row, c, true);
        }
        if let Some(c) = idx.output_x[w] {
            g.set(row, c, true);
        }
        for v in 0..n {
            let bit = p.a.get(w, v) ^ (v == w && p.b.get(w));
            if bit {
                g.set(row, idx.z[v], true);
            }
        }
    }

    // Detector space: (ker G ∩ output-free) + (ker G ∩ input-in-S).
    let kernel = g.kernel_basis();
    let output_coords: BTreeSet<usize> = (0..n)
        .flat_map(|w| {
            let mut coords = Vec::new();
            if let Some(c) = idx.output_x[w] {
                coords.push(c);
            }
            if p.is_output(w) {
                coords.push(idx.z[w]);
            }
            coords
        })
        .collect();
    let free_output_rows: Vec<BitVector> = (0..n1)
        .filter(|c| !output_coords.contains(c))
        .map(|c| BitVector::from_indices(n1, &[c]))
        .collect();
    let output_free = BitMatrix::from_rows(&free_output_rows, n1);

    // Input condition: the restriction to (input Z nodes | input X nodes)
    // lies in the rowspace of (S^X | S^Z) — X and Z exchanged through Ω.
    let input_coords: BTreeSet<usize> = (0..n)
        .filter(|&w| p.is_input(w))
        .flat_map(|w| [idx.z[w], idx.input_x[w].unwrap()])
        .collect();
    let mut input_rows: Vec<BitVector> = Vec::new();
    for s in &p.input_stabilizers {
        let mut v = BitVector::zeros(n1);
        for w in s.support() {
            if s.x_part().get(w) {
                v.set(idx.z[w], true);
            }
            if s.z_part().get(w) {
                v.set(idx.input_x[w].unwrap(), true);
            }
        }
        input_rows.push(v);
    }
    for c in 0..n1 {
        if !input_coords.contains(&c) {
            input_rows.push(BitVector::from_indices(n1, &[c]));
        }
    }
    let input_in_s = BitMatrix::from_rows(&input_rows, n1);

    let d_output = kernel.subspace_intersection(&output_free)?;
    let d_input = kernel.subspace_intersection(&input_in_s)?;
    // Output-free detectors first, then greedy completion from the input
    // side; deterministic ordering.
    let mut h_rows: Vec<BitVector> = Vec::new();
    let mut span: Vec<BitVector> = Vec::new();
    let push_new = |row: BitVector, h_rows: &mut Vec<BitVector>, span: &mut Vec<BitVector>| {
        let probe = BitMatrix::from_rows(span, row.len())
            .vstack(&BitMatrix::from_rows(&[row.clone()], row.len()))
            .expect("equal column counts");
        if probe.rank() > span.len() {
            span.push(row.clone());
            h_rows.push(row);
        }
    };
    for r in 0..d_output.rows() {
        push_new(d_output.row(r), &mut h_rows, &mut span);
    }
    for r in 0..d_input.rows() {
        push_new(d_input.row(r), &mut h_rows, &mut span);
    }
    let h = BitMatrix::from_rows(&h_rows, n1);

    // Assemble the stored complex: d2 = Gᵀ, d1 = H.
    let mut error_nodes = vec![
        ErrorNode {
            kind: ErrorNodeKind::Z,
            wire: 0,
        };
        n1
    ];
    for w in 0..n {
        if let Some(c) = idx.input_x[w] {
            error_nodes[c] = ErrorNode {
                kind: ErrorNodeKind::InputX,
                wire: w,
            };
        }
        if let Some(c) = idx.output_x[w] {
            error_nodes[c] = ErrorNode {
                kind: ErrorNodeKind::OutputX,
                wire: w,
            };
        }
        error_nodes[idx.z[w]] = ErrorNode {
            kind: ErrorNodeKind::Z,
            wire: w,
        };
    }
    let labels2: Vec<Label> = (0..n_s)
        .map(|j| Label::new(format!("gS{j}"), NodeKind::Gauge))
        .chain(
            wire_rows
                .iter()
                .map(|&w| Label::new(format!("g{w}"), NodeKind::Gauge)),
        )
        .collect();
    let labels1: Vec<Label> = error_nodes
        .iter()
        .map(|en| match en.kind {
            ErrorNodeKind::InputX => Label::new(format!("Xin{}", en.wire), NodeKind::ErrorX),
            ErrorNodeKind::OutputX => Label::new(format!("Xout{}", en.wire), NodeKind::ErrorX),
            ErrorNodeKind::Z => Label::new(format!("Z{}", en.wire), NodeKind::ErrorZ),
        })
        .collect();
    let labels0: Vec<Label> = (0..h.rows())
        .map(|k| Label::new(format!("d{k}"), NodeKind::Detector))
        .collect();
    let complex = ChainComplex2::new(g.transpose(), h.clone(), labels2, labels1, labels0)?;
    Ok(ClusterStateComplex {
        complex,
        g,
        h,
        error_nodes,
        n_s,
        n_i,
        n_o,
    })
}

/// Role of a node in the compressed representation graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompressedNode {
    /// Combined error/gauge node of X type (virtual).
    XType { wire: usize, output: bool },
    /// Combined error/gauge node of Z type (physical).
    ZType { wire: usize },
    /// Input-stabilizer node.
    Stabilizer { index: usize },
    /// Detector node.
    Detector { index: usize },
}

/// The compressed (or co-) representation: a directed graph whose first
/// block of nodes carries both an error and a gauge interpretation.
#[derive(Clone, Debug)]
pub struct CompressedRepresentation {
    /// Square adjacency matrix over all nodes.
    pub adjacency: BitMatrix,
    pub nodes: Vec<CompressedNode>,
    /// True for the co-representation (arrows inverted).
    pub co: bool,
}

fn augmented_blocks(csc: &ClusterStateComplex) -> (BitMatrix, BitMatrix) {
    let n1 = csc.g.cols();
    let n_s = csc.n_s;
    let pad_rows = csc.n_i + csc.n_o;
    let size = n1 + n_s;
    // G̃: pad n_I+n_O zero rows and n_S zero columns to make G square.
    let mut g_tilde = BitMatrix::zeros(size, size);
    for r in 0..csc.g.rows() {
        for c in 0..n1 {
            if csc.g.get(r, c) {
                g_tilde.set(r, c, true);
            }
        }
    }
    debug_assert_eq!(csc.g.rows() + pad_rows, size);
    // H̃ = [[H, 0], [0, I_{n_S}]].
    let m = csc.h.rows();
    let mut h_tilde = BitMatrix::zeros(m + n_s, size);
    for r in 0..m {
        for c in 0..n1 {
            if csc.h.get(r, c) {
                h_tilde.set(r, c, true);
            }
        }
    }
    for k in 0..n_s {
        h_tilde.set(m + k, n1 + k, true);
    }
    (g_tilde, h_tilde)
}

fn compressed_nodes(csc: &ClusterStateComplex) -> Vec<CompressedNode> {
    let mut nodes: Vec<CompressedNode> = csc
        .error_nodes
        .iter()
        .map(|en| match en.kind {
            ErrorNodeKind::InputX => CompressedNode::XType {
                wire: en.wire,
                output: false,
            },
            ErrorNodeKind::OutputX => CompressedNode::XType {
                wire: en.wire,
                output: true,
            },
            ErrorNodeKind::Z => CompressedNode::ZType { wire: en.wire },
        })
        .collect();
    for j in 0..csc.n_s {
        nodes.push(CompressedNode::Stabilizer { index: j });
    }
    for k in 0..csc.h.rows() + csc.n_s {
        nodes.push(CompressedNode::Detector { index: k });
    }
    nodes
}

fn assemble_compressed(csc: &ClusterStateComplex, co: bool) -> CompressedRepresentation {
    let (g_tilde, h_tilde) = augmented_blocks(csc);
    let size = g_tilde.rows();
    let m_all = h_tilde.rows();
    let total = size + m_all;
    let top_left = if co { g_tilde.clone() } else { g_tilde.transpose() };
    let mut adjacency = BitMatrix::zeros(total, total);
    for r in 0..size {
        for c in 0..size {
            if top_left.get(r, c) {
                adjacency.set(r, c, true);
            }
        }
    }
    for r in 0..m_all {
        for c in 0..size {
            if h_tilde.get(r, c) {
                // Bottom-left H̃ block and its transposed top-right block.
                adjacency.set(size + r, c, true);
                adjacency.set(c, size + r, true);
            }
        }
    }
    CompressedRepresentation {
        adjacency,
        nodes: compressed_nodes(csc),
        co,
    }
}

/// The compressed representation `B = [[G̃ᵀ, H̃ᵀ], [H̃, 0]]`.
pub fn compressed_representation(csc: &ClusterStateComplex) -> CompressedRepresentation {
    assemble_compressed(csc, false)
}

/// The compressed co-representation (all arrows inverted).
pub fn co_representation(csc: &ClusterStateComplex) -> CompressedRepresentation {
    assemble_compressed(csc, true)
}

impl CompressedRepresentation {
    /// Graphviz DOT export: circles for combined error/gauge nodes (filled
    /// = Z type, open = X type), triangles for detectors.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph compressed {\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let (name, attrs) = match node {
                CompressedNode::XType { wire, output } => (
                    format!("X{}{}", if *output { "out" } else { "in" }, wire),
                    "shape=circle style=solid".to_string(),
                ),
                CompressedNode::ZType { wire } => (
                    format!("Z{wire}"),
                    "shape=circle style=filled fillcolor=gray".to_string(),
                ),
                CompressedNode::Stabilizer { index } => {
                    (format!("S{index}"), "shape=circle style=dashed".to_string())
                }
                CompressedNode::Detector { index } => {
                    (format!("D{index}"), "shape=triangle".to_string())
                }
            };
            let _ = writeln!(out, "  n{i} [label=\"{name}\" {attrs}];");
        }
        for r in 0..self.adjacency.rows() {
            for c in 0..self.adjacency.cols() {
                if self.adjacency.get(r, c) {
                    let _ = writeln!(out, "  n{r} -> n{c};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Outcome of comparing a pattern's cluster-state complex with the
/// spacetime complex of its circuit realization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub dim_h1: (usize, usize),
    pub detector_dims: (usize, usize),
    /// Distances of the reduced complexes, when `dim H1 > 0`.
    pub distance: Option<(usize, usize)>,
    pub failures: Vec<String>,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that the spacetime complex of the pattern's realization and its
/// cluster-state complex agree on homology dimension, distance (after
/// reduction to fixpoint), and detector-space dimension. Also validates
/// every spacetime stabilizer against the boundary conditions (input
/// restriction in the stabilizer group, or trivial output restriction).
pub fn verify_equivalence_to_spacetime(
    p: &MbqcPattern,
    cap: usize,
) -> Result<EquivalenceReport, MbqcError> {
    let circuit = realize_circuit(p)?.normalize();
    let sc = spacetime_complex(&circuit)?;
    let csc = cluster_state_complex(p)?;
    let mut failures = Vec::new();

    // Pre-validate: the spacetime-stabilizer space is spanned by operators
    // that restrict on the input wires at the first timestep to an input
    // stabilizer, together with operators trivial on the output wires
    // after the first timestep. A basis row may mix the two kinds, so the
    // check is on spans rather than on individual rows.
    let n = p.n();
    let t_max = sc.t_max();
    let width = 2 * n * t_max;
    let coord = |wire: usize, t: usize, z: bool| {
        (t - 1) * n + wire + if z { n * t_max } else { 0 }
    };
    let input_wires: Vec<usize> = p.inputs().collect();
    let mut input_anchored: Vec<BitVector> = Vec::new();
    for c in 0..width {
        let at_input_start = input_wires
            .iter()
            .any(|&w| c == coord(w, 1, false) || c == coord(w, 1, true));
        if !at_input_start {
            input_anchored.push(BitVector::from_indices(width, &[c]));
        }
    }
    for s in &p.input_stabilizers {
        let mut row = BitVector::zeros(width);
        for &w in &input_wires {
            row.set(coord(w, 1, false), s.x_part().get(w));
            row.set(coord(w, 1, true), s.z_part().get(w));
        }
        input_anchored.push(row);
    }
    let mut output_free: Vec<BitVector> = Vec::new();
    for c in 0..width {
        let at_output_tail = (2..=t_max).any(|t| {
            (0..n)
                .filter(|&w| p.is_output(w))
                .any(|w| c == coord(w, t, false) || c == coord(w, t, true))
        });
        if !at_output_tail {
            output_free.push(BitVector::from_indices(width, &[c]));
        }
    }
    let cond1 = BitMatrix::from_rows(&input_anchored, width);
    let cond2 = BitMatrix::from_rows(&output_free, width);
    let space = sc.stabilizers();
    let part1 = space.subspace_intersection(&cond1)?;
    let part2 = space.subspace_intersection(&cond2)?;
    let covered = part1.subspace_sum(&part2)?;
    if covered.rank() != space.rank() {
        failures.push(format!(
            "spacetime stabilizers violate the boundary conditions: only {} of {} \
             dimensions decompose into input-anchored and output-free parts",
            covered.rank(),
            space.rank()
        ));
    }

    let dim_sc = sc.complex().homology_dimension();
    let dim_cs = csc.complex().homology_dimension();
    if dim_sc != dim_cs {
        failures.push(format!("dim H1 differs: {dim_sc} vs {dim_cs}"));
    }
    let det_sc = sc.complex().dim_c0();
    let det_cs = csc.detector_count();
    if det_sc != det_cs {
        failures.push(format!("detector dimensions differ: {det_sc} vs {det_cs}"));
    }

    let distance = if dim_sc > 0 && dim_sc == dim_cs {
        let red_sc =
            reduce_to_fixpoint(sc.complex()).map_err(|e| MbqcError::Reduction(e.to_string()))?;
        let red_cs =
            reduce_to_fixpoint(csc.complex()).map_err(|e| MbqcError::Reduction(e.to_string()))?;
        let d_sc = red_sc.complex.distance(cap)?;
        let d_cs = red_cs.complex.distance(cap)?;
        if d_sc != d_cs {
            failures.push(format!("distances differ: {d_sc} vs {d_cs}"));
        }
        Some((d_sc, d_cs))
    } else {
        None
    };

    Ok(EquivalenceReport {
        dim_h1: (dim_sc, dim_cs),
        detector_dims: (det_sc, det_cs),
        distance,
        failures,
    })
}

/// Parses the pattern text format: `NODES <n>`, `EDGE <i> <j>`,
/// `INPUT <i>`, `OUTPUT <i>`, `YMEAS <i>`, `STAB <pauli-on-inputs>`;
/// `#` starts a comment. Stabilizer strings are over the input wires in
/// ascending order.
pub fn parse_pattern(text: &str) -> Result<MbqcPattern, MbqcError> {
    let err = |line: usize, message: &str| MbqcError::Parse {
        line,
        message: message.to_string(),
    };
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut inputs = BTreeSet::new();
    let mut outputs = BTreeSet::new();
    let mut ymeas = Vec::new();
    let mut stab_strings: Vec<(usize, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse_idx = |tok: &str| {
            tok.parse::<usize>()
                .map_err(|_| err(line_no, &format!("bad index '{tok}'")))
        };
        match tokens[0] {
            "NODES" => {
                if n.is_some() || tokens.len() != 2 {
                    return Err(err(line_no, "NODES needs one count, once"));
                }
                n = Some(parse_idx(tokens[1])?);
            }
            "EDGE" => {
                if tokens.len() != 3 {
                    return Err(err(line_no, "EDGE needs two indices"));
                }
                edges.push((parse_idx(tokens[1])?, parse_idx(tokens[2])?));
            }
            "INPUT" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "INPUT needs one index"));
                }
                inputs.insert(parse_idx(tokens[1])?);
            }
            "OUTPUT" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "OUTPUT needs one index"));
                }
                outputs.insert(parse_idx(tokens[1])?);
            }
            "YMEAS" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "YMEAS needs one index"));
                }
                ymeas.push(parse_idx(tokens[1])?);
            }
            "STAB" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "STAB needs one operator"));
                }
                stab_strings.push((line_no, tokens[1].to_string()));
            }
            other => return Err(err(line_no, &format!("unknown directive '{other}'"))),
        }
    }
    let n = n.ok_or_else(|| err(1, "missing NODES line"))?;
    let mut a = BitMatrix::zeros(n, n);
    for (i, j) in edges {
        if i >= n || j >= n {
            return Err(MbqcError::WireOutOfRange {
                wire: i.max(j),
                n,
            });
        }
        if i == j {
            return Err(MbqcError::BadAdjacency);
        }
        a.set(i, j, true);
        a.set(j, i, true);
    }
    let mut b = BitVector::zeros(n);
    for w in ymeas {
        if w >= n {
            return Err(MbqcError::WireOutOfRange { wire: w, n });
        }
        b.set(w, true);
    }
    let input_list: Vec<usize> = inputs.iter().copied().collect();
    let mut input_stabilizers = Vec::new();
    for (line_no, s) in stab_strings {
        let p = PauliOp::parse(&s).map_err(|e| err(line_no, &e.to_string()))?;
        if p.len() != input_list.len() {
            return Err(err(line_no, "STAB length must equal the number of inputs"));
        }
        let mut x = BitVector::zeros(n);
        let mut z = BitVector::zeros(n);
        for (pos, &w) in input_list.iter().enumerate() {
            x.set(w, p.x_part().get(pos));
            z.set(w, p.z_part().get(pos));
        }
        input_stabilizers.push(PauliOp::from_parts(x, z).expect("equal lengths"));
    }
    MbqcPattern::new(a, inputs, outputs, b, input_stabilizers)
}
