//! Clifford-circuit intermediate representation, Pauli propagation,
//! spackles/backles, elementary propagation operators, and assembly of the
//! spacetime complex.
//!
//! A circuit acts on `n` wires over `T` timesteps (`T` is made odd by
//! normalization). Gate columns sit between consecutive timesteps, `|+⟩`
//! initializations live at time 1, and final single-qubit X/Y measurements
//! live at time `T`. Every gate, measurement, initialization, and input
//! stabilizer contributes elementary propagation operators; together they
//! generate the gauge group of the circuit's spacetime subsystem code.

use crate::complex::{ChainComplex2, ComplexError, Label, NodeKind};
use crate::gf2::{BitMatrix, BitVector, Gf2Error};
use crate::pauli::{derive_center, omega_columns, PauliOp};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

fn pauli_from(x: BitVector, z: BitVector) -> PauliOp {
    PauliOp::from_parts(x, z).expect("x and z parts have equal length")
}

/// Errors from circuit construction, parsing, and analysis.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("wire index {wire} out of range for {n} wires")]
    WireOutOfRange { wire: usize, n: usize },
    #[error("column {column}: wire {wire} used by more than one element")]
    OverlappingWires { column: usize, wire: usize },
    #[error("timestep {t} out of range 1..={t_max}")]
    TimeOutOfRange { t: usize, t_max: usize },
    #[error("input stabilizers must commute pairwise")]
    NonCommutingInputs,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Basis of a final single-qubit measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MeasBasis {
    X,
    Y,
}

/// One circuit element inside a gate column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircuitElement {
    H(usize),
    S(usize),
    /// The composite `H·S` (apply S, then H).
    Hs(usize),
    /// A Pauli gate; propagates every operator unchanged (phases dropped).
    Pauli(PauliOp),
    /// Controlled-Pauli: control wire plus a target Pauli operator
    /// (identity on the control).
    ControlledPauli { control: usize, target: PauliOp },
    Cz(usize, usize),
    /// An atomic CZ network over member wires; treated as a single gate.
    CzNetworkBox {
        members: Vec<usize>,
        /// Symmetric adjacency among `members` (indexed by position).
        adjacency: BitMatrix,
    },
    /// Mid-circuit multi-qubit Pauli measurement; acts as identity for
    /// propagation purposes.
    MeasurePauli(PauliOp),
    Identity(usize),
}

impl CircuitElement {
    /// Wires the element occupies within its column.
    pub fn support(&self) -> Vec<usize> {
        match self {
            CircuitElement::H(i)
            | CircuitElement::S(i)
            | CircuitElement::Hs(i)
            | CircuitElement::Identity(i) => vec![*i],
            CircuitElement::Pauli(p) | CircuitElement::MeasurePauli(p) => p.support(),
            CircuitElement::ControlledPauli { control, target } => {
                let mut s = target.support();
                if !s.contains(control) {
                    s.push(*control);
                    s.sort_unstable();
                }
                s
            }
            CircuitElement::Cz(i, j) => {
                let mut s = vec![*i, *j];
                s.sort_unstable();
                s
            }
            CircuitElement::CzNetworkBox { members, .. } => members.clone(),
        }
    }
}

/// A Clifford circuit: gate columns between timesteps, `|+⟩` inits at time
/// 1, final X/Y measurements at time `T`, and input stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordCircuit {
    n: usize,
    /// `columns[k]` sits between timesteps `k+1` and `k+2`.
    columns: Vec<Vec<CircuitElement>>,
    plus_inits: BTreeSet<usize>,
    final_meas: Vec<(usize, MeasBasis)>,
    input_stabilizers: Vec<PauliOp>,
}

impl CliffordCircuit {
    /// Builds and validates a circuit. Does not normalize; see
    /// [`CliffordCircuit::normalize`].
    pub fn new(
        n: usize,
        columns: Vec<Vec<CircuitElement>>,
        plus_inits: impl IntoIterator<Item = usize>,
        final_meas: Vec<(usize, MeasBasis)>,
        input_stabilizers: Vec<PauliOp>,
    ) -> Result<Self, CircuitError> {
        let plus_inits: BTreeSet<usize> = plus_inits.into_iter().collect();
        for (column, elems) in columns.iter().enumerate() {
            let mut used = BTreeSet::new();
            for e in elems {
                for w in e.support() {
                    if w >= n {
                        return Err(CircuitError::WireOutOfRange { wire: w, n });
                    }
                    if !used.insert(w) {
                        return Err(CircuitError::OverlappingWires { column, wire: w });
                    }
                }
                if let CircuitElement::Pauli(p)
                | CircuitElement::MeasurePauli(p)
                | CircuitElement::ControlledPauli { target: p, .. } = e
                {
                    if p.len() != n {
                        return Err(CircuitError::WireOutOfRange { wire: p.len(), n });
                    }
                }
            }
        }
        for &w in &plus_inits {
            if w >= n {
                return Err(CircuitError::WireOutOfRange { wire: w, n });
            }
        }
        for &(w, _) in &final_meas {
            if w >= n {
                return Err(CircuitError::WireOutOfRange { wire: w, n });
            }
        }
        for s in &input_stabilizers {
            if s.len() != n {
                return Err(CircuitError::WireOutOfRange { wire: s.len(), n });
            }
        }
        for a in 0..input_stabilizers.len() {
            for b in a + 1..input_stabilizers.len() {
                if !input_stabilizers[a].commutes(&input_stabilizers[b]) {
                    return Err(CircuitError::NonCommutingInputs);
                }
            }
        }
        Ok(CliffordCircuit {
            n,
            columns,
            plus_inits,
            final_meas,
            input_stabilizers,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of timesteps (`columns + 1`).
    pub fn t_max(&self) -> usize {
        self.columns.len() + 1
    }

    pub fn columns(&self) -> &[Vec<CircuitElement>] {
        &self.columns
    }

    pub fn plus_inits(&self) -> impl Iterator<Item = usize> + '_ {
        self.plus_inits.iter().copied()
    }

    pub fn final_measurements(&self) -> &[(usize, MeasBasis)] {
        &self.final_meas
    }

    pub fn input_stabilizers(&self) -> &[PauliOp] {
        &self.input_stabilizers
    }

    /// Appends one identity column when `T` is even, so that `T` is odd.
    pub fn normalize(mut self) -> CliffordCircuit {
        if self.t_max() % 2 == 0 {
            self.columns.push(Vec::new());
        }
        self
    }

    /// Conjugates `p` forward through the column between timesteps
    /// `t` and `t+1` (1-based column `t` = `columns[t-1]`).
    fn propagate_column(&self, p: &PauliOp, column: usize, forward: bool) -> PauliOp {
        let mut x = p.x_part().clone();
        let mut z = p.z_part().clone();
        for e in &self.columns[column] {
            match e {
                CircuitElement::H(i) => {
                    let (xi, zi) = (x.get(*i), z.get(*i));
                    x.set(*i, zi);
                    z.set(*i, xi);
                }
                CircuitElement::S(i) => {
                    // X → Y, Z → Z; symplectically self-inverse.
                    let xi = x.get(*i);
                    if xi {
                        z.flip(*i);
                    }
                }
                CircuitElement::Hs(i) => {
                    let (xi, zi) = (x.get(*i), z.get(*i));
                    if forward {
                        // X → Y, Z → X.
                        x.set(*i, xi ^ zi);
                        z.set(*i, xi);
                    } else {
                        x.set(*i, zi);
                        z.set(*i, xi ^ zi);
                    }
                }
                CircuitElement::Cz(a, b) => {
                    let (xa, xb) = (x.get(*a), x.get(*b));
                    if xb {
                        z.flip(*a);
                    }
                    if xa {
                        z.flip(*b);
                    }
                }
                CircuitElement::CzNetworkBox { members, adjacency } => {
                    let flips: Vec<usize> = members
                        .iter()
                        .enumerate()
                        .filter(|(pos, _)| {
                            members
                                .iter()
                                .enumerate()
                                .any(|(q, &wq)| adjacency.get(*pos, q) && x.get(wq))
                        })
                        .map(|(_, &w)| w)
                        .collect();
                    for w in flips {
                        z.flip(w);
                    }
                }
                CircuitElement::ControlledPauli { control, target } => {
                    // X_c → X_c·Q; targets anticommuting with Q pick up Z_c.
                    // Self-inverse up to phase.
                    let anti = x.dot(target.z_part()) ^ z.dot(target.x_part());
                    if x.get(*control) {
                        x.xor_assign(target.x_part());
                        z.xor_assign(target.z_part());
                    }
                    if anti {
                        z.flip(*control);
                    }
                }
                CircuitElement::Pauli(_)
                | CircuitElement::MeasurePauli(_)
                | CircuitElement::Identity(_) => {}
            }
        }
        pauli_from(x, z)
    }

    /// `Π_{t→t'}(P)`: conjugates `p` through all columns between timesteps
    /// `t` and `t'` (forward when `t ≤ t'`, backward otherwise).
    pub fn propagate(&self, p: &PauliOp, t: usize, t_to: usize) -> Result<PauliOp, CircuitError> {
        let t_max = self.t_max();
        for s in [t, t_to] {
            if s == 0 || s > t_max {
                return Err(CircuitError::TimeOutOfRange { t: s, t_max });
            }
        }
        let mut cur = p.clone();
        if t <= t_to {
            for col in t..t_to {
                cur = self.propagate_column(&cur, col - 1, true);
            }
        } else {
            for col in (t_to..t).rev() {
                cur = self.propagate_column(&cur, col - 1, false);
            }
        }
        Ok(cur)
    }

    /// The spackle of `p` at timestep `t`: the product over `s ≥ t` of the
    /// forward-propagated operator placed at timestep `s`.
    pub fn spackle(&self, p: &PauliOp, t: usize) -> Result<SpacetimeOperator, CircuitError> {
        let mut op = SpacetimeOperator::identity(self.n, self.t_max());
        let mut cur = p.clone();
        for s in t..=self.t_max() {
            op.xor_pauli_at(&cur, s);
            if s < self.t_max() {
                cur = self.propagate_column(&cur, s - 1, true);
            }
        }
        Ok(op)
    }

    /// The backle of `p` at timestep `t`: the product over `s ≤ t` of the
    /// backward-propagated operator placed at timestep `s`.
    pub fn backle(&self, p: &PauliOp, t: usize) -> Result<SpacetimeOperator, CircuitError> {
        let mut op = SpacetimeOperator::identity(self.n, self.t_max());
        let mut cur = p.clone();
        for s in (1..=t).rev() {
            op.xor_pauli_at(&cur, s);
            if s > 1 {
                cur = self.propagate_column(&cur, s - 2, false);
            }
        }
        Ok(op)
    }
}

/// A Pauli operator over the `n·T` spacetime qubits, stored symplectically
/// (X block then Z block; within a block, qubit `(i,t)` has index
/// `(t-1)·n + i`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpacetimeOperator {
    n: usize,
    t_max: usize,
    op: PauliOp,
}

impl SpacetimeOperator {
    pub fn identity(n: usize, t_max: usize) -> Self {
        SpacetimeOperator {
            n,
            t_max,
            op: PauliOp::identity(n * t_max),
        }
    }

    pub fn qubit_index(&self, wire: usize, t: usize) -> usize {
        debug_assert!(wire < self.n && t >= 1 && t <= self.t_max);
        (t - 1) * self.n + wire
    }

    /// Multiplies in `p` (over the `n` wires) at timestep `t`.
    pub fn xor_pauli_at(&mut self, p: &PauliOp, t: usize) {
        let base = (t - 1) * self.n;
        let (x, z) = (p.x_part(), p.z_part());
        for i in p.support() {
            if x.get(i) {
                self.op.flip_x(base + i);
            }
            if z.get(i) {
                self.op.flip_z(base + i);
            }
        }
    }

    /// The underlying Pauli operator over `n·T` qubits.
    pub fn pauli(&self) -> &PauliOp {
        &self.op
    }

    /// Length-`2nT` symplectic vector (X block then Z block).
    pub fn symplectic(&self) -> BitVector {
        self.op.symplectic()
    }

    /// The restriction of the operator to timestep `t`, as a Pauli over the
    /// `n` wires.
    pub fn at_time(&self, t: usize) -> PauliOp {
        let base = (t - 1) * self.n;
        let mut x = BitVector::zeros(self.n);
        let mut z = BitVector::zeros(self.n);
        for i in 0..self.n {
            x.set(i, self.op.x_part().get(base + i));
            z.set(i, self.op.z_part().get(base + i));
        }
        pauli_from(x, z)
    }

    pub fn from_symplectic(n: usize, t_max: usize, v: &BitVector) -> Self {
        SpacetimeOperator {
            n,
            t_max,
            op: PauliOp::from_symplectic(v),
        }
    }
}

impl fmt::Display for SpacetimeOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in 1..=self.t_max {
            if t > 1 {
                f.write_str("|")?;
            }
            write!(f, "{}", self.at_time(t))?;
        }
        Ok(())
    }
}

/// Where an elementary propagation operator comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GeneratorSource {
    /// A gate (or implicit identity wire) between timesteps `t` and `t+1`.
    Gate { t: usize, description: String },
    /// Mid-circuit measurement outcome operator `Q_{t+1}`.
    Measurement { t: usize, operator: String },
    /// Centralizer pair `R_t R_{t+1}` of a mid-circuit measurement.
    MeasurementCentralizer { t: usize, operator: String },
    /// Input stabilizer placed at timestep 1.
    InputStabilizer { index: usize },
    /// `X` at timestep 1 from a `|+⟩` initialization.
    PlusInit { wire: usize },
    /// Final single-qubit X/Y measurement at timestep `T`.
    FinalMeasurement { wire: usize, basis: MeasBasis },
}

/// An elementary propagation operator with its provenance inside the
/// circuit.
#[derive(Clone, Debug)]
pub struct ElementaryOperator {
    pub operator: SpacetimeOperator,
    pub source: GeneratorSource,
}

impl ElementaryOperator {
    /// True when the generator carries a measurement outcome bit.
    pub fn has_outcome(&self) -> bool {
        matches!(
            self.source,
            GeneratorSource::Measurement { .. } | GeneratorSource::FinalMeasurement { .. }
        )
    }
}

fn single_wire_pauli(n: usize, wire: usize, basis: MeasBasis) -> PauliOp {
    match basis {
        MeasBasis::X => PauliOp::single_x(n, wire),
        MeasBasis::Y => PauliOp::single_y(n, wire),
    }
}

/// Basis of the centralizer of `q` among Paulis supported on `supp(q)`:
/// exactly `2m - 1` generators for an `m`-qubit operator.
fn centralizer_on_support(q: &PauliOp) -> Vec<PauliOp> {
    let supp = q.support();
    let m = supp.len();
    let n = q.len();
    // Symplectic-form row of q restricted to its support: ω(P, Q) =
    // x_P·z_Q + z_P·x_Q.
    let mut row = BitVector::zeros(2 * m);
    for (pos, &w) in supp.iter().enumerate() {
        row.set(pos, q.z_part().get(w));
        row.set(m + pos, q.x_part().get(w));
    }
    let form = BitMatrix::from_rows(&[row], 2 * m);
    let kernel = form.kernel_basis();
    (0..kernel.rows())
        .map(|k| {
            let v = kernel.row(k);
            let mut x = BitVector::zeros(n);
            let mut z = BitVector::zeros(n);
            for (pos, &w) in supp.iter().enumerate() {
                x.set(w, v.get(pos));
                z.set(w, v.get(m + pos));
            }
            pauli_from(x, z)
        })
        .collect()
}

/// Computes all elementary propagation operators of a normalized circuit:
/// the gauge generators of the spacetime subsystem code.
pub fn elementary_propagation_operators(
    c: &CliffordCircuit,
) -> Result<Vec<ElementaryOperator>, CircuitError> {
    let n = c.n();
    let t_max = c.t_max();
    let mut ops = Vec::new();
    for (col, elems) in c.columns().iter().enumerate() {
        let t = col + 1;
        let mut covered = vec![false; n];
        for e in elems {
            for w in e.support() {
                covered[w] = true;
            }
            if let CircuitElement::MeasurePauli(q) = e {
                let mut meas = SpacetimeOperator::identity(n, t_max);
                meas.xor_pauli_at(q, t + 1);
                ops.push(ElementaryOperator {
                    operator: meas,
                    source: GeneratorSource::Measurement {
                        t,
                        operator: q.to_string(),
                    },
                });
                for r in centralizer_on_support(q) {
                    let mut pair = SpacetimeOperator::identity(n, t_max);
                    pair.xor_pauli_at(&r, t);
                    pair.xor_pauli_at(&r, t + 1);
                    ops.push(ElementaryOperator {
                        operator: pair,
                        source: GeneratorSource::MeasurementCentralizer {
                            t,
                            operator: r.to_string(),
                        },
                    });
                }
            } else {
                for w in e.support() {
                    for basis in [MeasBasis::X, MeasBasis::Y] {
                        // Use X and Z as the two generators per wire.
                        let p = match basis {
                            MeasBasis::X => PauliOp::single_x(n, w),
                            MeasBasis::Y => PauliOp::single_z(n, w),
                        };
                        let image = c.propagate_column(&p, col, true);
                        let mut op = SpacetimeOperator::identity(n, t_max);
                        op.xor_pauli_at(&p, t);
                        op.xor_pauli_at(&image, t + 1);
                        ops.push(ElementaryOperator {
                            operator: op,
                            source: GeneratorSource::Gate {
                                t,
                                description: format!("{}@{}", p, w),
                            },
                        });
                    }
                }
            }
        }
        for w in 0..n {
            if covered[w] {
                continue;
            }
            for p in [PauliOp::single_x(n, w), PauliOp::single_z(n, w)] {
                let mut op = SpacetimeOperator::identity(n, t_max);
                op.xor_pauli_at(&p, t);
                op.xor_pauli_at(&p, t + 1);
                ops.push(ElementaryOperator {
                    operator: op,
                    source: GeneratorSource::Gate {
                        t,
                        description: format!("{}@wire{}", p, w),
                    },
                });
            }
        }
    }
    for (index, s) in c.input_stabilizers().iter().enumerate() {
        let mut op = SpacetimeOperator::identity(n, t_max);
        op.xor_pauli_at(s, 1);
        ops.push(ElementaryOperator {
            operator: op,
            source: GeneratorSource::InputStabilizer { index },
        });
    }
    for wire in c.plus_inits() {
        let mut op = SpacetimeOperator::identity(n, t_max);
        op.xor_pauli_at(&PauliOp::single_x(n, wire), 1);
        ops.push(ElementaryOperator {
            operator: op,
            source: GeneratorSource::PlusInit { wire },
        });
    }
    for &(wire, basis) in c.final_measurements() {
        let mut op = SpacetimeOperator::identity(n, t_max);
        op.xor_pauli_at(&single_wire_pauli(n, wire, basis), t_max);
        ops.push(ElementaryOperator {
            operator: op,
            source: GeneratorSource::FinalMeasurement { wire, basis },
        });
    }
    Ok(ops)
}

/// The spacetime complex of a circuit: its gauge complex together with the
/// generator provenance needed for stabilizer classification.
#[derive(Clone, Debug)]
pub struct SpacetimeComplex {
    complex: ChainComplex2,
    n: usize,
    t_max: usize,
    generators: Vec<ElementaryOperator>,
    /// Stabilizer generator rows (symplectic, basis of the gauge center).
    stabilizers: BitMatrix,
}

impl SpacetimeComplex {
    pub fn complex(&self) -> &ChainComplex2 {
        &self.complex
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn generators(&self) -> &[ElementaryOperator] {
        &self.generators
    }

    /// Symplectic rows of the stabilizer basis (center of the gauge group).
    pub fn stabilizers(&self) -> &BitMatrix {
        &self.stabilizers
    }

    pub fn stabilizer_operator(&self, row: usize) -> SpacetimeOperator {
        SpacetimeOperator::from_symplectic(self.n, self.t_max, &self.stabilizers.row(row))
    }
}

/// Builds the spacetime complex of a normalized circuit: gauge rows are the
/// elementary propagation operators, stabilizer rows are a basis of the
/// center of the gauge group.
pub fn spacetime_complex(c: &CliffordCircuit) -> Result<SpacetimeComplex, CircuitError> {
    let n = c.n();
    let t_max = c.t_max();
    let generators = elementary_propagation_operators(c)?;
    let rows: Vec<BitVector> = generators.iter().map(|g| g.operator.symplectic()).collect();
    let h_g = BitMatrix::from_rows(&rows, 2 * n * t_max);
    let h_s = derive_center(&h_g);
    let d2 = h_g.transpose();
    let d1 = omega_columns(&h_s);
    let labels2: Vec<Label> = generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let name = match &g.source {
                GeneratorSource::Gate { t, description } => format!("g{i}:{description}@t{t}"),
                GeneratorSource::Measurement { t, operator } => format!("g{i}:M[{operator}]@t{t}"),
                GeneratorSource::MeasurementCentralizer { t, operator } => {
                    format!("g{i}:C[{operator}]@t{t}")
                }
                GeneratorSource::InputStabilizer { index } => format!("g{i}:in{index}"),
                GeneratorSource::PlusInit { wire } => format!("g{i}:plus{wire}"),
                GeneratorSource::FinalMeasurement { wire, basis } => {
                    format!("g{i}:M{basis:?}{wire}")
                }
            };
            Label::new(name, NodeKind::Gauge)
        })
        .collect();
    let mut labels1 = Vec::with_capacity(2 * n * t_max);
    for (kind, tag) in [(NodeKind::ErrorX, "X"), (NodeKind::ErrorZ, "Z")] {
        for t in 1..=t_max {
            for i in 0..n {
                labels1.push(Label::new(format!("{tag}{i}@t{t}"), kind));
            }
        }
    }
    let labels0: Vec<Label> = (0..h_s.rows())
        .map(|k| Label::new(format!("s{k}"), NodeKind::Detector))
        .collect();
    let complex = ChainComplex2::new(d2, d1, labels2, labels1, labels0)?;
    Ok(SpacetimeComplex {
        complex,
        n,
        t_max,
        generators,
        stabilizers: h_s,
    })
}

/// Classification of one spacetime stabilizer generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum StabilizerClass {
    /// A deterministic parity check on measurement outcomes.
    FullDetector {
        /// Descriptions of the measurement outcomes whose parity is fixed.
        measurements: Vec<String>,
    },
    /// Spackle decomposition exists but the operator still acts on the
    /// final timestep (outputs).
    IncompleteDetectorForward,
    /// Only a backle decomposition over measurements exists (operator
    /// reaches back to timestep 1).
    IncompleteDetectorBackward,
}

/// Classification report for one stabilizer-basis element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifiedStabilizer {
    pub index: usize,
    pub class: StabilizerClass,
    /// True when both a spackle and a backle decomposition exist.
    pub ambiguous: bool,
}

/// Expresses every stabilizer generator of the spacetime complex as a
/// combination of source spackles (preferred) or measurement backles, and
/// classifies it as a full or incomplete detector.
pub fn classify_stabilizers(
    sc: &SpacetimeComplex,
    c: &CliffordCircuit,
) -> Result<Vec<ClassifiedStabilizer>, CircuitError> {
    let n = c.n();
    let t_max = c.t_max();
    let dim = 2 * n * t_max;

    // Spackles of every outcome-carrying or deterministic source.
    struct Source {
        spackle: BitVector,
        backle: Option<BitVector>,
        description: String,
        outcome: bool,
        final_meas: bool,
    }
    let mut sources: Vec<Source> = Vec::new();
    for (col, elems) in c.columns().iter().enumerate() {
        let t = col + 1;
        for e in elems {
            if let CircuitElement::MeasurePauli(q) = e {
                sources.push(Source {
                    spackle: c.spackle(q, t + 1)?.symplectic(),
                    backle: Some(c.backle(q, t)?.symplectic()),
                    description: format!("M[{q}]@t{t}"),
                    outcome: true,
                    final_meas: false,
                });
            }
        }
    }
    for &(wire, basis) in c.final_measurements() {
        let p = single_wire_pauli(n, wire, basis);
        sources.push(Source {
            spackle: c.spackle(&p, t_max)?.symplectic(),
            backle: Some(c.backle(&p, t_max)?.symplectic()),
            description: format!("M{basis:?}{wire}@t{t_max}"),
            outcome: true,
            final_meas: true,
        });
    }
    for (index, s) in c.input_stabilizers().iter().enumerate() {
        sources.push(Source {
            spackle: c.spackle(s, 1)?.symplectic(),
            backle: None,
            description: format!("in{index}"),
            outcome: false,
            final_meas: false,
        });
    }
    for wire in c.plus_inits() {
        sources.push(Source {
            spackle: c.spackle(&PauliOp::single_x(n, wire), 1)?.symplectic(),
            backle: None,
            description: format!("plus{wire}"),
            outcome: false,
            final_meas: false,
        });
    }

    let spackle_rows: Vec<BitVector> = sources.iter().map(|s| s.spackle.clone()).collect();
    let spackle_matrix = BitMatrix::from_rows(&spackle_rows, dim).transpose();
    let backle_rows: Vec<BitVector> = sources.iter().filter_map(|s| s.backle.clone()).collect();
    let backle_matrix = BitMatrix::from_rows(&backle_rows, dim).transpose();

    let mut out = Vec::new();
    for k in 0..sc.stabilizers().rows() {
        let target = sc.stabilizers().row(k);
        let forward = spackle_matrix.solve(&target)?;
        let backward = backle_matrix.solve(&target)?;
        let ambiguous = forward.is_some() && backward.is_some();
        let class = if let Some(coeffs) = forward {
            // Remove final-measurement contributions; a full detector has
            // nothing left acting at the final timestep.
            let mut residual = target.clone();
            let mut measurements = Vec::new();
            for (idx, src) in sources.iter().enumerate() {
                if !coeffs.get(idx) {
                    continue;
                }
                if src.final_meas {
                    residual.xor_assign(&src.spackle);
                }
                if src.outcome {
                    measurements.push(src.description.clone());
                }
            }
            let residual_op = SpacetimeOperator::from_symplectic(n, t_max, &residual);
            if residual_op.at_time(t_max).is_identity() {
                StabilizerClass::FullDetector { measurements }
            } else {
                StabilizerClass::IncompleteDetectorForward
            }
        } else if backward.is_some() {
            StabilizerClass::IncompleteDetectorBackward
        } else {
            // The center is generated by spackles and backles; reaching
            // here means the complex and circuit are out of sync.
            return Err(CircuitError::Parse {
                line: 0,
                message: format!("stabilizer {k} admits no spackle or backle decomposition"),
            });
        };
        out.push(ClassifiedStabilizer {
            index: k,
            class,
            ambiguous,
        });
    }
    Ok(out)
}

/// Parses the line-based circuit text format.
///
/// `WIRES <n>`, `INPUT <pauli>`, `TICK` (column separator), `H|S|HS <i>`,
/// `X|Y|Z <i>`, `CZ <i> <j>`, `CP <control> <pauli>`,
/// `CZBOX { CZ i j ; ... }`, `MPP <pauli>`, `MX|MY <i>`, `PLUS <i>`;
/// `#` starts a comment.
pub fn parse_circuit(text: &str) -> Result<CliffordCircuit, CircuitError> {
    let mut n: Option<usize> = None;
    let mut columns: Vec<Vec<CircuitElement>> = vec![Vec::new()];
    let mut plus_inits = Vec::new();
    let mut final_meas = Vec::new();
    let mut input_stabilizers = Vec::new();
    let mut czbox: Option<Vec<(usize, usize)>> = None;

    let err = |line: usize, message: &str| CircuitError::Parse {
        line,
        message: message.to_string(),
    };
    let parse_idx = |tok: &str, line: usize| {
        tok.parse::<usize>()
            .map_err(|_| err(line, &format!("bad wire index '{tok}'")))
    };
    let parse_pauli = |tok: &str, n: usize, line: usize| {
        let p = PauliOp::parse(tok).map_err(|e| err(line, &e.to_string()))?;
        if p.len() != n {
            return Err(err(line, "operator length does not match WIRES"));
        }
        Ok(p)
    };
    // Consumes CZ pairs from inside a CZBOX; returns true when '}' was seen.
    let consume_box = |tokens: &[&str],
                       pairs: &mut Vec<(usize, usize)>,
                       line_no: usize|
     -> Result<bool, CircuitError> {
        let mut idx = 0;
        while idx < tokens.len() {
            match tokens[idx] {
                "}" => {
                    if idx + 1 != tokens.len() {
                        return Err(err(line_no, "trailing tokens after CZBOX '}'"));
                    }
                    return Ok(true);
                }
                "CZ" => {
                    if idx + 2 >= tokens.len() {
                        return Err(err(line_no, "CZBOX: CZ needs two wire indices"));
                    }
                    let a = parse_idx(tokens[idx + 1], line_no)?;
                    let b = parse_idx(tokens[idx + 2], line_no)?;
                    if a == b {
                        return Err(err(line_no, "CZBOX: self-loop CZ"));
                    }
                    pairs.push((a, b));
                    idx += 3;
                }
                other => return Err(err(line_no, &format!("CZBOX: unexpected token '{other}'"))),
            }
        }
        Ok(false)
    };
    let build_box = |pairs: Vec<(usize, usize)>| -> CircuitElement {
        let members: BTreeSet<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        let members: Vec<usize> = members.into_iter().collect();
        let mut adjacency = BitMatrix::zeros(members.len(), members.len());
        for (a, b) in pairs {
            let pa = members.binary_search(&a).unwrap();
            let pb = members.binary_search(&b).unwrap();
            adjacency.set(pa, pb, true);
            adjacency.set(pb, pa, true);
        }
        CircuitElement::CzNetworkBox { members, adjacency }
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens: Vec<&str> = line
            .split(|ch: char| ch.is_whitespace() || ch == ';')
            .filter(|t| !t.is_empty())
            .collect();
        if let Some(mut pairs) = czbox.take() {
            // Inside an open CZBOX: consume CZ pairs until '}'.
            if consume_box(&tokens, &mut pairs, line_no)? {
                columns.last_mut().unwrap().push(build_box(pairs));
            } else {
                czbox = Some(pairs);
            }
            continue;
        }
        let head = tokens.remove(0);
        match head {
            "WIRES" => {
                if n.is_some() {
                    return Err(err(line_no, "duplicate WIRES line"));
                }
                if tokens.len() != 1 {
                    return Err(err(line_no, "WIRES needs one count"));
                }
                n = Some(parse_idx(tokens[0], line_no)?);
                continue;
            }
            _ => {}
        }
        let n_val = n.ok_or_else(|| err(line_no, "WIRES must come first"))?;
        let column = columns.last_mut().unwrap();
        match head {
            "TICK" => {
                columns.push(Vec::new());
            }
            "INPUT" => {
                if tokens.len() != 1 {
                    return Err(err(line_no, "INPUT needs one operator"));
                }
                input_stabilizers.push(parse_pauli(tokens[0], n_val, line_no)?);
            }
            "H" | "S" | "HS" => {
                if tokens.len() != 1 {
                    return Err(err(line_no, "gate needs one wire index"));
                }
                let w = parse_idx(tokens[0], line_no)?;
                column.push(match head {
                    "H" => CircuitElement::H(w),
                    "S" => CircuitElement::S(w),
                    _ => CircuitElement::Hs(w),
                });
            }
            "X" | "Y" | "Z" => {
                if tokens.len() != 1 {
                    return Err(err(line_no, "Pauli gate needs one wire index"));
                }
                let w = parse_idx(tokens[0], line_no)?;
                if w >= n_val {
                    return Err(CircuitError::WireOutOfRange { wire: w, n: n_val });
                }
                let p = match head {
                    "X" => PauliOp::single_x(n_val, w),
                    "Y" => PauliOp::single_y(n_val, w),
                    _ => PauliOp::single_z(n_val, w),
                };
                column.push(CircuitElement::Pauli(p));
            }
            "CZ" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "CZ needs two wire indices"));
                }
                let a = parse_idx(tokens[0], line_no)?;
                let b = parse_idx(tokens[1], line_no)?;
                if a == b {
                    return Err(err(line_no, "CZ wires must differ"));
                }
                column.push(CircuitElement::Cz(a, b));
            }
            "CP" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "CP needs a control and an operator"));
                }
                let control = parse_idx(tokens[0], line_no)?;
                let target = parse_pauli(tokens[1], n_val, line_no)?;
                if target.support().contains(&control) {
                    return Err(err(line_no, "CP target must be identity on the control"));
                }
                if target.is_identity() {
                    return Err(err(line_no, "CP target must be non-identity"));
                }
                column.push(CircuitElement::ControlledPauli { control, target });
            }
            "CZBOX" => {
                if tokens.first() != Some(&"{") {
                    return Err(err(line_no, "CZBOX must open with '{'"));
                }
                let mut pairs = Vec::new();
                if consume_box(&tokens[1..], &mut pairs, line_no)? {
                    columns.last_mut().unwrap().push(build_box(pairs));
                } else {
                    czbox = Some(pairs);
                }
            }
            "MPP" => {
                if tokens.len() != 1 {
                    return Err(err(line_no, "MPP needs one operator"));
                }
                let p = parse_pauli(tokens[0], n_val, line_no)?;
                if p.is_identity() {
                    return Err(err(line_no, "MPP operator must be non-identity"));
                }
                column.push(CircuitElement::MeasurePauli(p));
            }
            "MX" | "MY" => {
                if tokens.len() != 1 {
                    return Err(err(line_no, "final measurement needs one wire index"));
                }
                let w = parse_idx(tokens[0], line_no)?;
                final_meas.push((
                    w,
                    if head == "MX" {
                        MeasBasis::X
                    } else {
                        MeasBasis::Y
                    },
                ));
            }
            "PLUS" => {
                if tokens.len() != 1 {
                    return Err(err(line_no, "PLUS needs one wire index"));
                }
                plus_inits.push(parse_idx(tokens[0], line_no)?);
            }
            other => {
                return Err(err(line_no, &format!("unknown directive '{other}'")));
            }
        }
    }
    if czbox.is_some() {
        return Err(err(text.lines().count(), "unterminated CZBOX"));
    }
    let n = n.ok_or_else(|| err(1, "missing WIRES line"))?;
    // Drop a trailing empty column left by a final TICK.
    while columns.len() > 1 && columns.last().map(|c| c.is_empty()) == Some(true) {
        columns.pop();
    }
    if columns.len() == 1 && columns[0].is_empty() {
        columns.clear();
    }
    CliffordCircuit::new(n, columns, plus_inits, final_meas, input_stabilizers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h_circuit() -> CliffordCircuit {
        parse_circuit("WIRES 1\nH 0\n").unwrap().normalize()
    }

    #[test]
    fn hadamard_elementary_operators_swap_x_and_z() {
        let c = h_circuit();
        assert_eq!(c.t_max(), 3);
        let x = PauliOp::single_x(1, 0);
        let z = PauliOp::single_z(1, 0);
        assert_eq!(c.propagate(&x, 1, 2).unwrap(), z);
        assert_eq!(c.propagate(&z, 1, 2).unwrap(), x);
        assert_eq!(c.propagate(&z, 2, 1).unwrap(), x);
    }

    #[test]
    fn two_qubit_x_measurement_has_four_generators() {
        let c = parse_circuit("WIRES 2\nMPP XX\n").unwrap().normalize();
        let ops = elementary_propagation_operators(&c).unwrap();
        let meas_ops: Vec<_> = ops
            .iter()
            .filter(|o| {
                matches!(
                    o.source,
                    GeneratorSource::Measurement { t: 1, .. }
                        | GeneratorSource::MeasurementCentralizer { t: 1, .. }
                )
            })
            .collect();
        assert_eq!(meas_ops.len(), 4);
        let rows: Vec<BitVector> = meas_ops.iter().map(|o| o.operator.symplectic()).collect();
        let m = BitMatrix::from_rows(&rows, rows[0].len());
        assert_eq!(m.rank(), 4);
    }

    #[test]
    fn empty_single_wire_circuit_has_two_logical_dimensions() {
        let c = CliffordCircuit::new(1, Vec::new(), [], Vec::new(), Vec::new())
            .unwrap()
            .normalize();
        assert_eq!(c.t_max(), 1);
        let sc = spacetime_complex(&c).unwrap();
        assert_eq!(sc.complex().homology_dimension(), 2);
    }

    #[test]
    fn spackles_of_measurements_are_gauge_operators() {
        let text = "WIRES 2\nPLUS 0\nPLUS 1\nH 0\nTICK\nCZ 0 1\nTICK\nMPP XX\nMX 0\nMX 1\n";
        let c = parse_circuit(text).unwrap().normalize();
        let sc = spacetime_complex(&c).unwrap();
        let gauge_rows = sc.complex().d2().transpose();
        let sp = c.spackle(&PauliOp::parse("XX").unwrap(), 3).unwrap();
        assert!(gauge_rows.rowspace_contains(&sp.symplectic()));
        let bk = c.backle(&PauliOp::parse("XX").unwrap(), 2).unwrap();
        assert!(gauge_rows.rowspace_contains(&bk.symplectic()));
    }
}
