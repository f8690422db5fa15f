//! Symplectic Pauli algebra and stabilizer/subsystem code objects, with
//! constructors turning codes into chain complexes.
//!
//! An n-qubit Pauli (phase discarded) is a pair of length-n bit vectors
//! `(x|z)`; two Paulis commute exactly when the symplectic form
//! `x·z′ + z·x′` vanishes. The symplectic vector of a Pauli is its X block
//! followed by its Z block, qubit-major, so the symplectic matrix Ω is the
//! literal block swap.

use crate::complex::{ChainComplex2, ComplexError, Label, NodeKind};
use crate::gf2::{BitMatrix, BitVector};
use std::fmt;
use thiserror::Error;

/// Errors from Pauli parsing and code construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("invalid Pauli character {0:?} (expected I, _, X, Y, or Z)")]
    BadCharacter(char),
    #[error("Pauli length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("generators do not commute: rows {0} and {1}")]
    NonCommuting(usize, usize),
    #[error("CSS commutation failure: H_Z·H_Xᵀ ≠ 0")]
    CssCommutation,
    #[error("stabilizer row {0} is not in the gauge group")]
    StabilizerNotInGauge(usize),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// An n-qubit Pauli operator in binary symplectic format, phases ignored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    x: BitVector,
    z: BitVector,
}

impl PauliOp {
    /// The identity on `n` qubits.
    pub fn identity(n: usize) -> Self {
        PauliOp {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    /// Builds from explicit X and Z parts of equal length.
    pub fn from_parts(x: BitVector, z: BitVector) -> Result<Self, PauliError> {
        if x.len() != z.len() {
            return Err(PauliError::Length {
                expected: x.len(),
                got: z.len(),
            });
        }
        Ok(PauliOp { x, z })
    }

    /// A single-qubit X at `i`.
    pub fn single_x(n: usize, i: usize) -> Self {
        PauliOp {
            x: BitVector::from_indices(n, &[i]),
            z: BitVector::zeros(n),
        }
    }

    /// A single-qubit Z at `i`.
    pub fn single_z(n: usize, i: usize) -> Self {
        PauliOp {
            x: BitVector::zeros(n),
            z: BitVector::from_indices(n, &[i]),
        }
    }

    /// A single-qubit Y at `i`.
    pub fn single_y(n: usize, i: usize) -> Self {
        PauliOp {
            x: BitVector::from_indices(n, &[i]),
            z: BitVector::from_indices(n, &[i]),
        }
    }

    /// Parses a string over `{I, _, X, Y, Z}` (case-insensitive).
    pub fn parse(text: &str) -> Result<Self, PauliError> {
        let mut x = Vec::new();
        let mut z = Vec::new();
        for c in text.chars() {
            match c.to_ascii_uppercase() {
                'I' | '_' => {
                    x.push(false);
                    z.push(false);
                }
                'X' => {
                    x.push(true);
                    z.push(false);
                }
                'Y' => {
                    x.push(true);
                    z.push(true);
                }
                'Z' => {
                    x.push(false);
                    z.push(true);
                }
                other => return Err(PauliError::BadCharacter(other)),
            }
        }
        Ok(PauliOp {
            x: BitVector::from_bits(x),
            z: BitVector::from_bits(z),
        })
    }

    /// Qubit count.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// True for the 0-qubit operator.
    pub fn is_empty(&self) -> bool {
        self.x.len() == 0
    }

    /// True when the operator is the identity.
    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// The X part.
    pub fn x_part(&self) -> &BitVector {
        &self.x
    }

    /// The Z part.
    pub fn z_part(&self) -> &BitVector {
        &self.z
    }

    /// Toggles the X component on qubit `i`.
    pub fn flip_x(&mut self, i: usize) {
        self.x.flip(i);
    }

    /// Toggles the Z component on qubit `i`.
    pub fn flip_z(&mut self, i: usize) {
        self.z.flip(i);
    }

    /// Qubits where the operator is not the identity, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.x.get(i) || self.z.get(i))
            .collect()
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> usize {
        self.support().len()
    }

    /// Weight in the single-qubit X/Z decoding basis: `|x| + |z|` (Y counts
    /// as two).
    pub fn symplectic_weight(&self) -> usize {
        self.x.weight() + self.z.weight()
    }

    /// The symplectic vector `(x|z)` of length 2n.
    pub fn symplectic(&self) -> BitVector {
        self.x.concat(&self.z)
    }

    /// Inverse of [`PauliOp::symplectic`].
    pub fn from_symplectic(v: &BitVector) -> Self {
        let n = v.len() / 2;
        assert_eq!(v.len(), 2 * n, "symplectic vector length must be even");
        let idx: Vec<usize> = (0..n).collect();
        let idz: Vec<usize> = (n..2 * n).collect();
        PauliOp {
            x: v.select(&idx),
            z: v.select(&idz),
        }
    }

    /// Product (phase discarded): component-wise XOR.
    pub fn mul(&self, other: &PauliOp) -> PauliOp {
        let mut out = self.clone();
        out.x.xor_assign(&other.x);
        out.z.xor_assign(&other.z);
        out
    }

    /// True when the two operators commute.
    pub fn commutes(&self, other: &PauliOp) -> bool {
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            let c = match (self.x.get(i), self.z.get(i)) {
                (false, false) => '_',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Applies the block swap Ω to a symplectic vector of length 2n.
pub fn omega(v: &BitVector) -> BitVector {
    let n = v.len() / 2;
    assert_eq!(v.len(), 2 * n);
    let idz: Vec<usize> = (n..2 * n).collect();
    let idx: Vec<usize> = (0..n).collect();
    v.select(&idz).concat(&v.select(&idx))
}

/// Applies Ω to every row of a symplectic matrix (i.e. computes `M·Ω`).
pub fn omega_columns(m: &BitMatrix) -> BitMatrix {
    let rows: Vec<BitVector> = (0..m.rows()).map(|r| omega(&m.row(r))).collect();
    BitMatrix::from_rows(&rows, m.cols())
}

/// A stabilizer code given by a symplectic parity-check matrix with mutually
/// commuting rows.
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    n: usize,
    h: BitMatrix,
}

impl StabilizerCode {
    /// Builds from generators, checking pairwise commutation.
    pub fn new(n: usize, generators: &[PauliOp]) -> Result<Self, PauliError> {
        for (i, g) in generators.iter().enumerate() {
            if g.len() != n {
                return Err(PauliError::Length {
                    expected: n,
                    got: g.len(),
                });
            }
            for (j, h) in generators.iter().enumerate().skip(i + 1) {
                if !g.commutes(h) {
                    return Err(PauliError::NonCommuting(i, j));
                }
            }
        }
        let rows: Vec<BitVector> = generators.iter().map(|g| g.symplectic()).collect();
        Ok(StabilizerCode {
            n,
            h: BitMatrix::from_rows(&rows, 2 * n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The m×2n symplectic parity-check matrix.
    pub fn h(&self) -> &BitMatrix {
        &self.h
    }

    /// Generators as Pauli operators.
    pub fn generators(&self) -> Vec<PauliOp> {
        (0..self.h.rows())
            .map(|r| PauliOp::from_symplectic(&self.h.row(r)))
            .collect()
    }
}

/// A subsystem code: a gauge group with a chosen stabilizer generating set.
#[derive(Clone, Debug)]
pub struct SubsystemCode {
    n: usize,
    h_g: BitMatrix,
    h_s: BitMatrix,
}

impl SubsystemCode {
    /// Builds from gauge and stabilizer generators. Every stabilizer must
    /// commute with every gauge operator and lie in the gauge group.
    pub fn new(n: usize, gauge: &[PauliOp], stabilizers: &[PauliOp]) -> Result<Self, PauliError> {
        for (i, s) in stabilizers.iter().enumerate() {
            if s.len() != n {
                return Err(PauliError::Length {
                    expected: n,
                    got: s.len(),
                });
            }
            for g in gauge {
                if !s.commutes(g) {
                    return Err(PauliError::NonCommuting(i, i));
                }
            }
        }
        let g_rows: Vec<BitVector> = gauge.iter().map(|g| g.symplectic()).collect();
        let h_g = BitMatrix::from_rows(&g_rows, 2 * n);
        for (i, s) in stabilizers.iter().enumerate() {
            if !h_g.rowspace_contains(&s.symplectic()) {
                return Err(PauliError::StabilizerNotInGauge(i));
            }
        }
        let s_rows: Vec<BitVector> = stabilizers.iter().map(|s| s.symplectic()).collect();
        Ok(SubsystemCode {
            n,
            h_g,
            h_s: BitMatrix::from_rows(&s_rows, 2 * n),
        })
    }

    /// Builds from a gauge group, deriving a stabilizer basis as the center.
    pub fn with_derived_stabilizers(n: usize, gauge: &[PauliOp]) -> Result<Self, PauliError> {
        let g_rows: Vec<BitVector> = gauge.iter().map(|g| g.symplectic()).collect();
        let h_g = BitMatrix::from_rows(&g_rows, 2 * n);
        let h_s = derive_center(&h_g);
        Ok(SubsystemCode { n, h_g, h_s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h_g(&self) -> &BitMatrix {
        &self.h_g
    }

    pub fn h_s(&self) -> &BitMatrix {
        &self.h_s
    }
}

/// A reduced basis of the center of the group generated by the rows of
/// `h_g`: elements of the rowspace commuting with every row.
pub fn derive_center(h_g: &BitMatrix) -> BitMatrix {
    // x = y·H_G commutes with all rows iff H_G·Ω·H_Gᵀ·yᵀ = 0.
    let gram = h_g
        .multiply(&omega_columns(h_g).transpose())
        .expect("square symplectic product");
    let combos = gram.transpose().kernel_basis();
    let center = combos.multiply(h_g).expect("shapes match");
    center.row_basis()
}

fn gauge_labels(m: usize, prefix: &str) -> Vec<Label> {
    (0..m)
        .map(|i| Label::new(format!("{prefix}{i}"), NodeKind::Gauge))
        .collect()
}

fn detector_labels(m: usize, prefix: &str) -> Vec<Label> {
    (0..m)
        .map(|i| Label::new(format!("{prefix}{i}"), NodeKind::Detector))
        .collect()
}

/// C1 labels for a symplectic error space: X block then Z block, qubit-major.
pub fn symplectic_error_labels(n: usize) -> Vec<Label> {
    let mut labels = Vec::with_capacity(2 * n);
    for i in 0..n {
        labels.push(Label::new(format!("X{i}"), NodeKind::ErrorX));
    }
    for i in 0..n {
        labels.push(Label::new(format!("Z{i}"), NodeKind::ErrorZ));
    }
    labels
}

/// The complex of a CSS code: `d2 = H_Xᵀ`, `d1 = H_Z` — C2 indexes the X
/// stabilizers, C1 the qubits, C0 the Z stabilizers.
pub fn css_complex(h_x: &BitMatrix, h_z: &BitMatrix) -> Result<ChainComplex2, PauliError> {
    if h_x.cols() != h_z.cols() {
        return Err(PauliError::Length {
            expected: h_x.cols(),
            got: h_z.cols(),
        });
    }
    if !h_z.multiply(&h_x.transpose()).map_err(ComplexError::Gf2)?.is_zero() {
        return Err(PauliError::CssCommutation);
    }
    let n = h_x.cols();
    let labels1 = (0..n)
        .map(|i| Label::new(format!("q{i}"), NodeKind::ErrorGeneric))
        .collect();
    Ok(ChainComplex2::new(
        h_x.transpose(),
        h_z.clone(),
        gauge_labels(h_x.rows(), "sx"),
        labels1,
        detector_labels(h_z.rows(), "sz"),
    )?)
}

/// The complex of a stabilizer code: `d2 = Hᵀ`, `d1 = H·Ω` — both C2 and C0
/// index the stabilizer generators, C1 is the symplectic error space.
pub fn stabilizer_complex(code: &StabilizerCode) -> ChainComplex2 {
    let d2 = code.h.transpose();
    let d1 = omega_columns(&code.h);
    ChainComplex2::new(
        d2,
        d1,
        gauge_labels(code.h.rows(), "s"),
        symplectic_error_labels(code.n),
        detector_labels(code.h.rows(), "s"),
    )
    .expect("stabilizer commutation guarantees the chain condition")
}

/// The gauge complex of a subsystem code: `d2 = H_Gᵀ`, `d1 = H_S·Ω`. Its
/// homology classes are the dressed logical operators; its cohomology
/// classes are the bare ones.
pub fn subsystem_complex(code: &SubsystemCode) -> ChainComplex2 {
    let d2 = code.h_g.transpose();
    let d1 = omega_columns(&code.h_s);
    ChainComplex2::new(
        d2,
        d1,
        gauge_labels(code.h_g.rows(), "g"),
        symplectic_error_labels(code.n),
        detector_labels(code.h_s.rows(), "s"),
    )
    .expect("stabilizer-gauge commutation guarantees the chain condition")
}

/// Parsed contents of a code description file.
#[derive(Clone, Debug)]
pub enum CodeFile {
    /// CSS shortcut rows `SX`/`SZ`.
    Css { h_x: BitMatrix, h_z: BitMatrix },
    /// `S` rows only.
    Stabilizer(StabilizerCode),
    /// `G` rows with optional explicit `S` rows.
    Subsystem(SubsystemCode),
}

impl CodeFile {
    /// Builds the corresponding chain complex.
    pub fn to_complex(&self) -> Result<ChainComplex2, PauliError> {
        match self {
            CodeFile::Css { h_x, h_z } => css_complex(h_x, h_z),
            CodeFile::Stabilizer(code) => Ok(stabilizer_complex(code)),
            CodeFile::Subsystem(code) => Ok(subsystem_complex(code)),
        }
    }
}

/// Errors from the code text format.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing N header")]
    MissingHeader,
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Parses the code text format: `N <n>` header, then `G <pauli>` (gauge),
/// `S <pauli>` (stabilizer), `SX <bits>` / `SZ <bits>` (CSS shortcut) lines.
/// `#` starts a comment.
pub fn parse_code_file(text: &str) -> Result<CodeFile, CodeParseError> {
    let mut n: Option<usize> = None;
    let mut gauge = Vec::new();
    let mut stabs = Vec::new();
    let mut sx_rows: Vec<BitVector> = Vec::new();
    let mut sz_rows: Vec<BitVector> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| CodeParseError::Line { line, message };
        let mut parts = content.split_whitespace();
        let head = parts.next().expect("non-empty line");
        let rest: Vec<&str> = parts.collect();
        let expect_one = |what: &str| -> Result<&str, CodeParseError> {
            if rest.len() == 1 {
                Ok(rest[0])
            } else {
                Err(err(format!("{head} expects one {what}")))
            }
        };
        match head {
            "N" => {
                let v: usize = expect_one("integer")?
                    .parse()
                    .map_err(|_| err("bad qubit count".into()))?;
                n = Some(v);
            }
            "G" | "S" => {
                let p = PauliOp::parse(expect_one("pauli string")?)
                    .map_err(|e| err(e.to_string()))?;
                if head == "G" {
                    gauge.push(p);
                } else {
                    stabs.push(p);
                }
            }
            "SX" | "SZ" => {
                let bits = BitVector::parse(expect_one("bitstring")?)
                    .ok_or_else(|| err("bad bitstring".into()))?;
                if head == "SX" {
                    sx_rows.push(bits);
                } else {
                    sz_rows.push(bits);
                }
            }
            other => return Err(err(format!("unknown directive {other}"))),
        }
    }
    let n = n.ok_or(CodeParseError::MissingHeader)?;
    let width_check = |rows: &[BitVector]| rows.iter().all(|r| r.len() == n);
    if !gauge.is_empty() {
        let code = if stabs.is_empty() {
            SubsystemCode::with_derived_stabilizers(n, &gauge)?
        } else {
            SubsystemCode::new(n, &gauge, &stabs)?
        };
        Ok(CodeFile::Subsystem(code))
    } else if !sx_rows.is_empty() || !sz_rows.is_empty() {
        if !width_check(&sx_rows) || !width_check(&sz_rows) {
            return Err(CodeParseError::Line {
                line: 0,
                message: "SX/SZ row width differs from N".into(),
            });
        }
        Ok(CodeFile::Css {
            h_x: BitMatrix::from_rows(&sx_rows, n),
            h_z: BitMatrix::from_rows(&sz_rows, n),
        })
    } else {
        Ok(CodeFile::Stabilizer(StabilizerCode::new(n, &stabs)?))
    }
}

/// The gauge generators of the rotated Bacon-Shor-style layout on an
/// `rows×cols` qubit grid: XX on horizontal neighbor pairs, ZZ on vertical
/// neighbor pairs; stabilizers are X on adjacent row pairs and Z on adjacent
/// column pairs.
pub fn bacon_shor(rows: usize, cols: usize) -> SubsystemCode {
    let n = rows * cols;
    let q = |r: usize, c: usize| r * cols + c;
    let mut gauge = Vec::new();
    for r in 0..rows {
        for c in 0..cols - 1 {
            let mut x = BitVector::zeros(n);
            x.set(q(r, c), true);
            x.set(q(r, c + 1), true);
            gauge.push(PauliOp::from_parts(x, BitVector::zeros(n)).expect("equal lengths"));
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols {
            let mut z = BitVector::zeros(n);
            z.set(q(r, c), true);
            z.set(q(r + 1, c), true);
            gauge.push(PauliOp::from_parts(BitVector::zeros(n), z).expect("equal lengths"));
        }
    }
    let mut stabs = Vec::new();
    for c in 0..cols - 1 {
        let mut x = BitVector::zeros(n);
        for r in 0..rows {
            x.set(q(r, c), true);
            x.set(q(r, c + 1), true);
        }
        stabs.push(PauliOp::from_parts(x, BitVector::zeros(n)).expect("equal lengths"));
    }
    for r in 0..rows - 1 {
        let mut z = BitVector::zeros(n);
        for c in 0..cols {
            z.set(q(r, c), true);
            z.set(q(r + 1, c), true);
        }
        stabs.push(PauliOp::from_parts(BitVector::zeros(n), z).expect("equal lengths"));
    }
    SubsystemCode::new(n, &gauge, &stabs).expect("Bacon-Shor generators are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xy_symplectic_vector() {
        let p = PauliOp::parse("XY").unwrap();
        assert_eq!(p.symplectic(), BitVector::parse("1101").unwrap());
    }

    #[test]
    fn anticommuting_single_qubit_pair() {
        let x = PauliOp::parse("X").unwrap();
        let z = PauliOp::parse("Z").unwrap();
        assert!(!x.commutes(&z));
        assert!(PauliOp::parse("XX")
            .unwrap()
            .commutes(&PauliOp::parse("ZZ").unwrap()));
    }
}
