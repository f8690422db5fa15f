//! Foliated cluster-state complexes built directly from CSS codes, general
//! stabilizer codes, and dynamical measurement schedules.
//!
//! Each constructor lays out a layered measurement pattern (data chains
//! teleported layer to layer, ancilla nodes wired to the data they check),
//! then installs a structured detector basis: one detector per repeated
//! check (a symmetric difference of ancilla spackles) plus boundary
//! detectors from ancilla backles. The resulting rows are validated against
//! the generic detector space of the underlying pattern.

use crate::circuit::{
    classify_stabilizers, spacetime_complex, CircuitElement, CircuitError, CliffordCircuit,
    StabilizerClass,
};
use crate::gf2::{BitMatrix, BitVector, Gf2Error};
use crate::mbqc::{cluster_state_complex, ClusterStateComplex, ErrorNodeKind, MbqcError, MbqcPattern};
use crate::pauli::{PauliError, PauliOp, StabilizerCode};
use serde::Serialize;
use thiserror::Error;

/// Errors from the foliation constructors and the schedule parser.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FoliateError {
    #[error("round count must be at least 1")]
    ZeroRounds,
    #[error("X and Z check matrices must have the same number of columns")]
    ShapeMismatch,
    #[error("X and Z checks must commute (H_X · H_Zᵀ = 0)")]
    CssCommutation,
    #[error("round {round}: measurements must pairwise commute")]
    NonCommutingRound { round: usize },
    #[error("round {round}: empty round or identity measurement")]
    BadRound { round: usize },
    #[error("operator length {found} does not match {expected} qubits")]
    LengthMismatch { expected: usize, found: usize },
    #[error("input stabilizers must pairwise commute")]
    NonCommutingInputs,
    #[error("detector set inconsistent with the kernel test")]
    InconsistentDetectors,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Mbqc(MbqcError),
}

impl From<MbqcError> for FoliateError {
    fn from(e: MbqcError) -> Self {
        match e {
            MbqcError::DetectorSpan => FoliateError::InconsistentDetectors,
            other => FoliateError::Mbqc(other),
        }
    }
}

/// Role of a pattern node in a foliated complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "role")]
pub enum NodeRole {
    /// A data node carrying qubit `qubit` of the underlying code.
    Data { qubit: usize },
    /// An ancilla node measuring generator `generator` of its layer's group.
    Ancilla { generator: usize },
}

/// Layer index and role of one pattern node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NodeInfo {
    /// Physical layer (virtual boundary layers are 0 and `layer_count - 1`).
    pub layer: usize,
    pub role: NodeRole,
}

/// A cluster-state complex with layer/role metadata per pattern node.
#[derive(Clone, Debug)]
pub struct LayeredComplex {
    complex: ClusterStateComplex,
    pattern: MbqcPattern,
    nodes: Vec<NodeInfo>,
    layer_count: usize,
}

impl LayeredComplex {
    pub fn complex(&self) -> &ClusterStateComplex {
        &self.complex
    }

    pub fn pattern(&self) -> &MbqcPattern {
        &self.pattern
    }

    /// Layer and role of each pattern node (indexed by wire).
    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    /// Total layer count, including the two virtual boundary layers.
    pub fn layer_count(&self) -> usize {
        self.layer_count
    }

    pub fn detector_count(&self) -> usize {
        self.complex.detector_count()
    }
}

/// One ancilla node of a foliation under construction.
struct AncillaSpec {
    layer: usize,
    generator: usize,
    /// Data neighbors as (qubit, data layer) pairs.
    neighbors: Vec<(usize, usize)>,
    /// Measured in the Y basis (odd number of Y factors in its check).
    y: bool,
    /// Earlier ancilla positions to connect to (odd X/Z-part intersections).
    partners: Vec<usize>,
}

/// Layered pattern under construction: data chains plus ancilla specs.
struct Foliation {
    n: usize,
    phys_layers: usize,
    ancillas: Vec<AncillaSpec>,
    input_stabilizers: Vec<PauliOp>,
}

/// Columns of the error-node space, indexed by wire.
struct ErrorColumns {
    z: Vec<usize>,
    xin: Vec<Option<usize>>,
    xout: Vec<Option<usize>>,
    n1: usize,
}

impl Foliation {
    fn data_wire(&self, qubit: usize, layer: usize) -> usize {
        (layer - 1) * self.n + qubit
    }

    fn ancilla_wire(&self, pos: usize) -> usize {
        self.n * self.phys_layers + pos
    }

    fn build_pattern(&self) -> Result<(MbqcPattern, Vec<NodeInfo>), FoliateError> {
        let n = self.n;
        let total = n * self.phys_layers + self.ancillas.len();
        let mut a = BitMatrix::zeros(total, total);
        let mut link = |u: usize, v: usize| {
            a.set(u, v, true);
            a.set(v, u, true);
        };
        for layer in 1..self.phys_layers {
            for q in 0..n {
                link(self.data_wire(q, layer), self.data_wire(q, layer + 1));
            }
        }
        for (pos, anc) in self.ancillas.iter().enumerate() {
            let w = self.ancilla_wire(pos);
            for &(q, layer) in &anc.neighbors {
                link(w, self.data_wire(q, layer));
            }
            for &other in &anc.partners {
                link(w, self.ancilla_wire(other));
            }
        }
        let mut b = BitVector::zeros(total);
        for (pos, anc) in self.ancillas.iter().enumerate() {
            if anc.y {
                b.set(self.ancilla_wire(pos), true);
            }
        }
        let inputs = 0..n;
        let outputs: Vec<usize> = (0..n).map(|q| self.data_wire(q, self.phys_layers)).collect();
        let stabilizers: Result<Vec<PauliOp>, FoliateError> = self
            .input_stabilizers
            .iter()
            .map(|s| {
                let mut x = BitVector::zeros(total);
                let mut z = BitVector::zeros(total);
                for q in 0..n {
                    x.set(q, s.x_part().get(q));
                    z.set(q, s.z_part().get(q));
                }
                PauliOp::from_parts(x, z).map_err(FoliateError::from)
            })
            .collect();
        let pattern = MbqcPattern::new(a, inputs, outputs, b, stabilizers?)?;
        let mut nodes = Vec::with_capacity(total);
        for layer in 1..=self.phys_layers {
            for q in 0..n {
                nodes.push(NodeInfo {
                    layer,
                    role: NodeRole::Data { qubit: q },
                });
            }
        }
        for anc in &self.ancillas {
            nodes.push(NodeInfo {
                layer: anc.layer,
                role: NodeRole::Ancilla {
                    generator: anc.generator,
                },
            });
        }
        Ok((pattern, nodes))
    }

    fn error_columns(&self, csc: &ClusterStateComplex) -> ErrorColumns {
        let total = self.n * self.phys_layers + self.ancillas.len();
        let mut cols = ErrorColumns {
            z: vec![0; total],
            xin: vec![None; total],
            xout: vec![None; total],
            n1: csc.error_nodes().len(),
        };
        for (c, node) in csc.error_nodes().iter().enumerate() {
            match node.kind {
                ErrorNodeKind::Z => cols.z[node.wire] = c,
                ErrorNodeKind::InputX => cols.xin[node.wire] = Some(c),
                ErrorNodeKind::OutputX => cols.xout[node.wire] = Some(c),
            }
        }
        cols
    }

    /// Spackle of an ancilla node: its own outcome plus the forward chains
    /// of its data neighbors (two layers per step; a chain that lands
    /// exactly on the virtual output layer contributes the virtual X node,
    /// one past it contributes nothing). `wire` is `None` for the virtual
    /// layer-0 ancillas that stand for input stabilizers.
    fn spackle_row(
        &self,
        cols: &ErrorColumns,
        layer: usize,
        neighbors: &[(usize, usize)],
        wire: Option<usize>,
    ) -> BitVector {
        let l_virt = self.phys_layers + 1;
        let mut v = BitVector::zeros(cols.n1);
        let mut flip = |c: usize| v.set(c, !v.get(c));
        if let Some(w) = wire {
            flip(cols.z[w]);
        }
        let mut t = 0;
        while layer + 2 * t + 1 <= l_virt {
            for &(q, lk) in neighbors {
                let m = lk + 2 * t + 1;
                if m <= self.phys_layers {
                    flip(cols.z[self.data_wire(q, m)]);
                } else if m == l_virt {
                    let w = self.data_wire(q, self.phys_layers);
                    flip(cols.xout[w].expect("output wire has a virtual X node"));
                }
            }
            t += 1;
        }
        v
    }

    /// Backle of an ancilla node: the downward mirror of its spackle (a
    /// chain that lands on the virtual input layer contributes the virtual
    /// X node of its input wire).
    fn backle_row(
        &self,
        cols: &ErrorColumns,
        layer: usize,
        neighbors: &[(usize, usize)],
        wire: Option<usize>,
    ) -> BitVector {
        let mut v = BitVector::zeros(cols.n1);
        let mut flip = |c: usize| v.set(c, !v.get(c));
        if let Some(w) = wire {
            flip(cols.z[w]);
        }
        let mut t = 0;
        while layer >= 2 * t + 1 {
            for &(q, lk) in neighbors {
                if lk < 2 * t + 1 {
                    continue;
                }
                let m = lk - 2 * t - 1;
                if m >= 1 {
                    flip(cols.z[self.data_wire(q, m)]);
                } else {
                    flip(cols.xin[q].expect("input wire has a virtual X node"));
                }
            }
            t += 1;
        }
        v
    }

    /// Full through-network chain of an input stabilizer: the nodes whose
    /// errors anticommute with the operator as it propagates from the
    /// virtual input layer to the virtual output layer. Equals the sum of
    /// the spackle and backle of a hypothetical ancilla measuring the same
    /// operator.
    fn propagation_row(&self, cols: &ErrorColumns, stab: &PauliOp) -> BitVector {
        let l_virt = self.phys_layers + 1;
        let mut v = BitVector::zeros(cols.n1);
        let mut flip = |c: usize| v.set(c, !v.get(c));
        for q in stab.z_part().support() {
            // Chain parity 0: virtual input node, then every other layer.
            flip(cols.xin[q].expect("input wire has a virtual X node"));
            let mut m = 2;
            while m <= self.phys_layers {
                flip(cols.z[self.data_wire(q, m)]);
                m += 2;
            }
            if l_virt % 2 == 0 {
                let w = self.data_wire(q, self.phys_layers);
                flip(cols.xout[w].expect("output wire has a virtual X node"));
            }
        }
        for q in stab.x_part().support() {
            // Chain parity 1: odd layers, starting on the input layer.
            let mut m = 1;
            while m <= self.phys_layers {
                flip(cols.z[self.data_wire(q, m)]);
                m += 2;
            }
            if l_virt % 2 == 1 {
                let w = self.data_wire(q, self.phys_layers);
                flip(cols.xout[w].expect("output wire has a virtual X node"));
            }
        }
        v
    }

    fn ancilla_spackle(&self, cols: &ErrorColumns, pos: usize) -> BitVector {
        let anc = &self.ancillas[pos];
        self.spackle_row(cols, anc.layer, &anc.neighbors, Some(self.ancilla_wire(pos)))
    }

    fn ancilla_backle(&self, cols: &ErrorColumns, pos: usize) -> BitVector {
        let anc = &self.ancillas[pos];
        self.backle_row(cols, anc.layer, &anc.neighbors, Some(self.ancilla_wire(pos)))
    }

    fn finish(self, detector_rows: Vec<BitVector>) -> Result<LayeredComplex, FoliateError> {
        let (pattern, nodes) = self.build_pattern()?;
        let csc = cluster_state_complex(&pattern)?;
        let complex = csc.with_detectors(&detector_rows)?;
        Ok(LayeredComplex {
            complex,
            pattern,
            nodes,
            layer_count: self.phys_layers + 2,
        })
    }
}

fn row_support(m: &BitMatrix, r: usize) -> Vec<usize> {
    m.row(r).support()
}

/// Foliates a CSS code: `2T+3` layers (both boundary layers virtual), data
/// chains of length `2T+1`, Z-check ancillas on odd layers wired within
/// their layer, X-check ancillas on even layers likewise. Detectors compare
/// each check with its repetition two layers up (or run to the boundary).
pub fn foliate_css(h_x: &BitMatrix, h_z: &BitMatrix, t: usize) -> Result<LayeredComplex, FoliateError> {
    if t == 0 {
        return Err(FoliateError::ZeroRounds);
    }
    if h_x.cols() != h_z.cols() {
        return Err(FoliateError::ShapeMismatch);
    }
    let n = h_x.cols();
    let product = h_x.multiply(&h_z.transpose())?;
    if (0..product.rows()).any(|r| !product.row(r).is_zero()) {
        return Err(FoliateError::CssCommutation);
    }

    let mut ancillas = Vec::new();
    let mut anc_at: Vec<Vec<usize>> = vec![Vec::new(); 2 * t + 1];
    for layer in 1..=2 * t {
        let checks = if layer % 2 == 1 { h_z } else { h_x };
        for i in 0..checks.rows() {
            anc_at[layer].push(ancillas.len());
            ancillas.push(AncillaSpec {
                layer,
                generator: i,
                neighbors: row_support(checks, i).into_iter().map(|q| (q, layer)).collect(),
                y: false,
                partners: Vec::new(),
            });
        }
    }
    let mut input_stabilizers = Vec::new();
    for i in 0..h_x.rows() {
        input_stabilizers.push(PauliOp::from_parts(h_x.row(i), BitVector::zeros(n))?);
    }
    for i in 0..h_z.rows() {
        input_stabilizers.push(PauliOp::from_parts(BitVector::zeros(n), h_z.row(i))?);
    }

    let foliation = Foliation {
        n,
        phys_layers: 2 * t + 1,
        ancillas,
        input_stabilizers,
    };
    let (pattern, _) = foliation.build_pattern()?;
    let csc = cluster_state_complex(&pattern)?;
    let cols = foliation.error_columns(&csc);

    let mut rows = Vec::new();
    for layer in 1..=2 * t {
        for (i, &pos) in anc_at[layer].iter().enumerate() {
            let mut row = foliation.ancilla_spackle(&cols, pos);
            if layer + 2 <= 2 * t {
                row.xor_assign(&foliation.ancilla_spackle(&cols, anc_at[layer + 2][i]));
            }
            rows.push(row);
        }
    }
    for layer in [1usize, 2] {
        for &pos in &anc_at[layer] {
            rows.push(foliation.ancilla_backle(&cols, pos));
        }
    }
    foliation.finish(rows)
}

/// Foliates a general stabilizer code: ancillas on odd layers only, wired to
/// their layer by the Z parts and to the layer above by the X parts, with
/// ancilla-ancilla edges for odd X/Z-part intersections and Y measurements
/// on checks with an odd number of Y factors.
pub fn foliate_stabilizer(code: &StabilizerCode, t: usize) -> Result<LayeredComplex, FoliateError> {
    if t == 0 {
        return Err(FoliateError::ZeroRounds);
    }
    let n = code.n();
    let generators = code.generators();
    let m = generators.len();

    let mut ancillas = Vec::new();
    let mut anc_at: Vec<Vec<usize>> = vec![Vec::new(); 2 * t];
    for layer in (1..=2 * t - 1).step_by(2) {
        let base = ancillas.len();
        for (i, g) in generators.iter().enumerate() {
            let mut neighbors: Vec<(usize, usize)> =
                g.z_part().support().into_iter().map(|q| (q, layer)).collect();
            neighbors.extend(g.x_part().support().into_iter().map(|q| (q, layer + 1)));
            let partners: Vec<usize> = (0..i)
                .filter(|&j| generators[i].x_part().dot(generators[j].z_part()))
                .map(|j| base + j)
                .collect();
            anc_at[layer].push(ancillas.len());
            ancillas.push(AncillaSpec {
                layer,
                generator: i,
                neighbors,
                y: g.x_part().dot(g.z_part()),
                partners,
            });
        }
    }
    let foliation = Foliation {
        n,
        phys_layers: 2 * t + 1,
        ancillas,
        input_stabilizers: generators.clone(),
    };
    let (pattern, _) = foliation.build_pattern()?;
    let csc = cluster_state_complex(&pattern)?;
    let cols = foliation.error_columns(&csc);

    let mut rows = Vec::new();
    for layer in (1..=2 * t - 1).step_by(2) {
        for (i, &pos) in anc_at[layer].iter().enumerate() {
            let mut row = foliation.ancilla_spackle(&cols, pos);
            if layer + 2 <= 2 * t - 1 {
                row.xor_assign(&foliation.ancilla_spackle(&cols, anc_at[layer + 2][i]));
            }
            rows.push(row);
        }
    }
    let _ = m;
    for &pos in &anc_at[1] {
        rows.push(foliation.ancilla_backle(&cols, pos));
    }
    foliation.finish(rows)
}

/// Round label controlling how a dynamical round is compiled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RoundType {
    X,
    Z,
    Xz,
    Zx,
}

/// A dynamical measurement schedule: `T` rounds of mutually commuting Pauli
/// measurements, plus the stabilizer group of the input state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicalSchedule {
    n: usize,
    rounds: Vec<Vec<PauliOp>>,
    input_stabilizers: Vec<PauliOp>,
}

impl DynamicalSchedule {
    pub fn new(
        n: usize,
        rounds: Vec<Vec<PauliOp>>,
        input_stabilizers: Vec<PauliOp>,
    ) -> Result<Self, FoliateError> {
        if rounds.is_empty() {
            return Err(FoliateError::ZeroRounds);
        }
        for (t, round) in rounds.iter().enumerate() {
            if round.is_empty() || round.iter().any(PauliOp::is_identity) {
                return Err(FoliateError::BadRound { round: t + 1 });
            }
            for g in round {
                if g.len() != n {
                    return Err(FoliateError::LengthMismatch {
                        expected: n,
                        found: g.len(),
                    });
                }
            }
            for i in 0..round.len() {
                for j in i + 1..round.len() {
                    if !round[i].commutes(&round[j]) {
                        return Err(FoliateError::NonCommutingRound { round: t + 1 });
                    }
                }
            }
        }
        for s in &input_stabilizers {
            if s.len() != n {
                return Err(FoliateError::LengthMismatch {
                    expected: n,
                    found: s.len(),
                });
            }
        }
        for i in 0..input_stabilizers.len() {
            for j in i + 1..input_stabilizers.len() {
                if !input_stabilizers[i].commutes(&input_stabilizers[j]) {
                    return Err(FoliateError::NonCommutingInputs);
                }
            }
        }
        Ok(DynamicalSchedule {
            n,
            rounds,
            input_stabilizers,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rounds(&self) -> &[Vec<PauliOp>] {
        &self.rounds
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    pub fn input_stabilizers(&self) -> &[PauliOp] {
        &self.input_stabilizers
    }

    /// Parses the line-based schedule format: optional `INPUT <pauli>`
    /// header lines, then blocks of `M <pauli>` lines separated by `ROUND`
    /// lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, FoliateError> {
        let err = |line: usize, message: &str| FoliateError::Parse {
            line,
            message: message.to_string(),
        };
        let mut n: Option<usize> = None;
        let mut inputs = Vec::new();
        let mut rounds: Vec<Vec<PauliOp>> = vec![Vec::new()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap();
            let rest: Vec<&str> = tokens.collect();
            let parse_op = |tok: &str| -> Result<PauliOp, FoliateError> {
                let p = PauliOp::parse(tok).map_err(|e| err(lineno + 1, &e.to_string()))?;
                if let Some(n) = n {
                    if p.len() != n {
                        return Err(err(lineno + 1, "operator length differs from earlier lines"));
                    }
                }
                Ok(p)
            };
            match head {
                "INPUT" => {
                    let [tok] = rest.as_slice() else {
                        return Err(err(lineno + 1, "INPUT takes one Pauli string"));
                    };
                    let p = parse_op(tok)?;
                    n = Some(p.len());
                    inputs.push(p);
                }
                "M" => {
                    let [tok] = rest.as_slice() else {
                        return Err(err(lineno + 1, "M takes one Pauli string"));
                    };
                    let p = parse_op(tok)?;
                    n = Some(p.len());
                    rounds.last_mut().unwrap().push(p);
                }
                "ROUND" => {
                    if !rest.is_empty() {
                        return Err(err(lineno + 1, "ROUND takes no arguments"));
                    }
                    if !rounds.last().unwrap().is_empty() {
                        rounds.push(Vec::new());
                    }
                }
                other => return Err(err(lineno + 1, &format!("unknown directive '{other}'"))),
            }
        }
        if rounds.last().is_some_and(Vec::is_empty) {
            rounds.pop();
        }
        let n = n.ok_or_else(|| err(0, "schedule has no measurements"))?;
        DynamicalSchedule::new(n, rounds, inputs)
    }
}

/// Labels every round of a schedule by the recursion on measurement content
/// and predecessor type: pure-X rounds are X-type; pure-Z and mixed rounds
/// are Z-/ZX-type after a fresh boundary (start, X, or ZX) and XZ-type
/// after a Z or XZ round.
pub fn type_rounds(s: &DynamicalSchedule) -> Vec<RoundType> {
    let mut out: Vec<RoundType> = Vec::with_capacity(s.rounds.len());
    for round in &s.rounds {
        let all_x = round.iter().all(|g| g.z_part().is_zero());
        let all_z = round.iter().all(|g| g.x_part().is_zero());
        let fresh = matches!(out.last(), None | Some(RoundType::X) | Some(RoundType::Zx));
        let ty = if all_x {
            RoundType::X
        } else if all_z {
            if fresh {
                RoundType::Z
            } else {
                RoundType::Xz
            }
        } else if fresh {
            RoundType::Zx
        } else {
            RoundType::Xz
        };
        debug_assert!(
            ty != RoundType::Z
                || matches!(out.last(), None | Some(RoundType::X) | Some(RoundType::Zx)),
            "a Z-type round may not follow a Z- or XZ-type round"
        );
        out.push(ty);
    }
    out
}

/// Foliates a dynamical schedule: layers are appended per round type (Z
/// rounds reuse the current layer; X/ZX/XZ rounds each add two), then
/// detectors are discovered on the measurement-gadget circuit and realized
/// as symmetric differences of ancilla spackles (forward detectors) or
/// backles (backward detectors).
pub fn foliate_dynamical(s: &DynamicalSchedule) -> Result<LayeredComplex, FoliateError> {
    let n = s.n;
    let types = type_rounds(s);

    // Layer recursion: one ancilla per measurement, in schedule order.
    let mut ancillas: Vec<AncillaSpec> = Vec::new();
    let mut phys = 1usize;
    for (round, &ty) in s.rounds.iter().zip(&types) {
        let base = ancillas.len();
        match ty {
            RoundType::Z => {
                for (i, g) in round.iter().enumerate() {
                    ancillas.push(AncillaSpec {
                        layer: phys,
                        generator: i,
                        neighbors: g.z_part().support().into_iter().map(|q| (q, phys)).collect(),
                        y: false,
                        partners: Vec::new(),
                    });
                }
            }
            RoundType::X => {
                for (i, g) in round.iter().enumerate() {
                    ancillas.push(AncillaSpec {
                        layer: phys + 1,
                        generator: i,
                        neighbors: g
                            .x_part()
                            .support()
                            .into_iter()
                            .map(|q| (q, phys + 1))
                            .collect(),
                        y: false,
                        partners: Vec::new(),
                    });
                }
                phys += 2;
            }
            RoundType::Zx | RoundType::Xz => {
                let (z_layer, x_layer, anc_layer) = if ty == RoundType::Zx {
                    (phys, phys + 1, phys)
                } else {
                    (phys + 2, phys + 1, phys + 2)
                };
                for (i, g) in round.iter().enumerate() {
                    let mut neighbors: Vec<(usize, usize)> =
                        g.z_part().support().into_iter().map(|q| (q, z_layer)).collect();
                    neighbors.extend(g.x_part().support().into_iter().map(|q| (q, x_layer)));
                    let partners: Vec<usize> = (0..i)
                        .filter(|&j| round[i].x_part().dot(round[j].z_part()))
                        .map(|j| base + j)
                        .collect();
                    ancillas.push(AncillaSpec {
                        layer: anc_layer,
                        generator: i,
                        neighbors,
                        y: g.x_part().dot(g.z_part()),
                        partners,
                    });
                }
                phys += 2;
            }
        }
    }
    let foliation = Foliation {
        n,
        phys_layers: phys,
        ancillas,
        input_stabilizers: s.input_stabilizers.clone(),
    };
    let (pattern, _) = foliation.build_pattern()?;
    let csc = cluster_state_complex(&pattern)?;
    let cols = foliation.error_columns(&csc);

    // Detector discovery on the measurement-gadget circuit: one Pauli
    // measurement per column, in schedule order.
    let measurements: Vec<PauliOp> = s.rounds.iter().flatten().cloned().collect();
    let columns: Vec<Vec<CircuitElement>> = measurements
        .iter()
        .map(|g| vec![CircuitElement::MeasurePauli(g.clone())])
        .collect();
    let circuit = CliffordCircuit::new(
        n,
        columns,
        std::iter::empty(),
        Vec::new(),
        s.input_stabilizers.clone(),
    )?
    .normalize();
    let sc = spacetime_complex(&circuit)?;
    let classes = classify_stabilizers(&sc, &circuit)?;

    let dim = sc.stabilizers().cols();
    let mut spackle_sources: Vec<BitVector> = Vec::new();
    for (k, g) in measurements.iter().enumerate() {
        spackle_sources.push(circuit.spackle(g, k + 2)?.symplectic());
    }
    for stab in s.input_stabilizers() {
        spackle_sources.push(circuit.spackle(stab, 1)?.symplectic());
    }
    let spackle_matrix = BitMatrix::from_rows(&spackle_sources, dim).transpose();
    let backle_sources: Vec<BitVector> = measurements
        .iter()
        .enumerate()
        .map(|(k, g)| Ok(circuit.backle(g, k + 1)?.symplectic()))
        .collect::<Result<_, CircuitError>>()?;
    let backle_matrix = BitMatrix::from_rows(&backle_sources, dim).transpose();

    // Virtual layer-0 ancillas: an input stabilizer propagates through the
    // whole network, so its detector contribution is the full alternating
    // chain of its support (Z parts start on the virtual input layer, X
    // parts on the first physical layer).
    let virtual_spackles: Vec<BitVector> = s
        .input_stabilizers()
        .iter()
        .map(|stab| foliation.propagation_row(&cols, stab))
        .collect();

    let mut rows = Vec::new();
    for classified in &classes {
        let target = sc.stabilizers().row(classified.index);
        let forward = match classified.class {
            StabilizerClass::FullDetector { .. } | StabilizerClass::IncompleteDetectorForward => {
                // A decomposition that touches no measurement is a pure
                // input-stabilizer propagation (gauge content, not a
                // detector); fall back to the backle decomposition then.
                spackle_matrix
                    .solve(&target)?
                    .filter(|coeffs| coeffs.support().iter().any(|&k| k < measurements.len()))
            }
            StabilizerClass::IncompleteDetectorBackward => None,
        };
        let row = if let Some(coeffs) = forward {
            let mut row = BitVector::zeros(cols.n1);
            for k in coeffs.support() {
                if k < measurements.len() {
                    row.xor_assign(&foliation.ancilla_spackle(&cols, k));
                } else {
                    row.xor_assign(&virtual_spackles[k - measurements.len()]);
                }
            }
            row
        } else {
            let coeffs = backle_matrix
                .solve(&target)?
                .ok_or(FoliateError::InconsistentDetectors)?;
            let mut row = BitVector::zeros(cols.n1);
            for k in coeffs.support() {
                row.xor_assign(&foliation.ancilla_backle(&cols, k));
            }
            row
        };
        rows.push(row);
    }
    foliation.finish(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(rows: &[&str]) -> BitMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let parsed: Vec<BitVector> = rows.iter().map(|r| BitVector::parse(r).unwrap()).collect();
        BitMatrix::from_rows(&parsed, cols)
    }

    #[test]
    fn zz_foliation_matches_expected_graph() {
        let h_x = BitMatrix::zeros(0, 2);
        let h_z = bits(&["11"]);
        let lc = foliate_css(&h_x, &h_z, 1).unwrap();
        // Three data layers of two qubits plus one ancilla on layer 1.
        assert_eq!(lc.pattern().n(), 7);
        assert_eq!(lc.layer_count(), 5);
        let a = lc.pattern().adjacency();
        assert!(a.get(6, 0) && a.get(6, 1));
        assert!(a.get(0, 2) && a.get(2, 4) && a.get(1, 3) && a.get(3, 5));
        // One repeated-check detector and one input-boundary detector.
        assert_eq!(lc.detector_count(), 2);
        assert_eq!(
            lc.nodes()[6],
            NodeInfo {
                layer: 1,
                role: NodeRole::Ancilla { generator: 0 }
            }
        );
    }

    #[test]
    fn xz_zx_foliation_connects_the_two_ancillas() {
        let code = StabilizerCode::new(
            2,
            &[PauliOp::parse("XZ").unwrap(), PauliOp::parse("ZX").unwrap()],
        )
        .unwrap();
        let lc = foliate_stabilizer(&code, 1).unwrap();
        // Six data nodes plus two ancillas; the ancillas share an edge.
        assert_eq!(lc.pattern().n(), 8);
        assert!(lc.pattern().adjacency().get(6, 7));
        assert!(!lc.pattern().y_mask().get(6));
    }

    #[test]
    fn css_and_stabilizer_foliations_agree_on_a_css_code() {
        let h_x = BitMatrix::zeros(0, 2);
        let h_z = bits(&["11"]);
        let css = foliate_css(&h_x, &h_z, 2).unwrap();
        let code = StabilizerCode::new(2, &[PauliOp::parse("ZZ").unwrap()]).unwrap();
        let stab = foliate_stabilizer(&code, 2).unwrap();
        assert_eq!(css.pattern().n(), stab.pattern().n());
        assert_eq!(css.pattern().adjacency(), stab.pattern().adjacency());
        assert_eq!(
            css.complex().complex().homology_dimension(),
            stab.complex().complex().homology_dimension()
        );
        assert_eq!(css.detector_count(), stab.detector_count());
    }

    #[test]
    fn round_typing_follows_the_recursion() {
        let x = PauliOp::parse("XX").unwrap();
        let z = PauliOp::parse("ZZ").unwrap();
        let mixed = PauliOp::parse("XZ").unwrap();
        let s = DynamicalSchedule::new(
            2,
            vec![
                vec![x.clone()],
                vec![z.clone()],
                vec![z.clone()],
                vec![mixed.clone()],
                vec![x],
                vec![mixed],
            ],
            Vec::new(),
        )
        .unwrap();
        assert_eq!(
            type_rounds(&s),
            vec![
                RoundType::X,
                RoundType::Z,
                RoundType::Xz,
                RoundType::Xz,
                RoundType::X,
                RoundType::Zx,
            ]
        );
    }

    #[test]
    fn single_z_round_reuses_the_input_layer() {
        let s = DynamicalSchedule::new(
            2,
            vec![vec![PauliOp::parse("ZZ").unwrap()]],
            vec![PauliOp::parse("ZZ").unwrap()],
        )
        .unwrap();
        let lc = foliate_dynamical(&s).unwrap();
        // No layers added: inputs and outputs coincide on layer 1.
        assert_eq!(lc.layer_count(), 3);
        assert_eq!(lc.pattern().n(), 3);
    }

    #[test]
    fn schedule_parser_round_trips() {
        let text = "INPUT XXXX\nINPUT ZZZZ\nM X_X_\nM _X_X\nROUND\nM ZZ__\nM __ZZ\n";
        let s = DynamicalSchedule::parse(text).unwrap();
        assert_eq!(s.round_count(), 2);
        assert_eq!(s.input_stabilizers().len(), 2);
        assert_eq!(s.rounds()[1][0], PauliOp::parse("ZZ__").unwrap());
    }

    #[test]
    fn subsystem_four_qubit_schedule_has_six_detectors() {
        let text = "M XXXX\nROUND\nM ZZZZ\nROUND\nM XXXX\nROUND\nM ZZZZ\n";
        let s = DynamicalSchedule::parse(text).unwrap();
        assert_eq!(
            type_rounds(&s),
            vec![RoundType::X, RoundType::Z, RoundType::X, RoundType::Z]
        );
        let lc = foliate_dynamical(&s).unwrap();
        assert_eq!(lc.detector_count(), 6);
    }

    #[test]
    fn ladder_schedule_has_six_detectors_and_two_layer_zero_ancillas() {
        let text =
            "INPUT XXXX\nINPUT ZZZZ\nM XXXX\nROUND\nM ZZZZ\nROUND\nM YYYY\nROUND\nM ZZZZ\n";
        let s = DynamicalSchedule::parse(text).unwrap();
        assert_eq!(
            type_rounds(&s),
            vec![RoundType::X, RoundType::Z, RoundType::Xz, RoundType::Xz]
        );
        assert_eq!(s.input_stabilizers().len(), 2);
        let lc = foliate_dynamical(&s).unwrap();
        assert_eq!(lc.detector_count(), 6);
        // YYYY has an even number of Y factors, so every ancilla is
        // measured in the X basis.
        assert!(lc.pattern().y_mask().is_zero());
    }
}
