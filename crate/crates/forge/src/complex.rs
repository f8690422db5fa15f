//! Length-2 chain complexes over GF(2).
//!
//! A [`ChainComplex2`] stores two boundary maps `d2 : C2 → C1` and
//! `d1 : C1 → C0` with `d1·d2 = 0`, together with named, typed basis nodes.
//! The module provides homology and cohomology, the intersection pairing and
//! dual bases, the exact distance oracle, and exact minimum-weight decoding,
//! all computed by deterministic elimination and Gray-code enumeration.
//!
//! C2 nodes are the generator side (gauge nodes of a code or circuit) and C0
//! nodes are the check side (detectors); C1 is the error space. Complexes
//! that are naturally written with arrows in the opposite direction are
//! transposed into this storage orientation by their constructors.

use crate::gf2::{gray_walk_rowspace, BitMatrix, BitVector, Gf2Error};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

/// The role a basis node plays in the graphical rendering of a complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// Generator node (C2 side): gauge or stabilizer generator.
    Gauge,
    /// X-type error node (C1).
    ErrorX,
    /// Z-type error node (C1).
    ErrorZ,
    /// Error node without X/Z typing (C1).
    ErrorGeneric,
    /// Check node (C0 side).
    Detector,
}

/// A named, typed basis node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub kind: NodeKind,
}

impl Label {
    pub fn new(name: impl Into<String>, kind: NodeKind) -> Self {
        Label {
            name: name.into(),
            kind,
        }
    }
}

/// Errors from complex construction and oracles.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("chain condition violated: d1·d2 has {0} nonzero entries")]
    ChainCondition(usize),
    #[error("label count mismatch on {space}: expected {expected}, got {got}")]
    LabelCount {
        space: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("boundary shapes incompatible: d2 is {d2:?}, d1 is {d1:?}")]
    BoundaryShape { d2: (usize, usize), d1: (usize, usize) },
    #[error("no non-trivial logical class: dim H1 = 0")]
    NoLogical,
    #[error("enumeration dimension {dim} exceeds cap {cap}")]
    Overflow { dim: usize, cap: usize },
    #[error("syndrome is not in the image of d1")]
    InfeasibleSyndrome,
    #[error("{context}: vector is not a {expected}")]
    NotInSubspace {
        context: &'static str,
        expected: &'static str,
    },
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("malformed complex JSON: {0}")]
    Json(String),
}

/// A length-2 chain complex with labeled bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex2 {
    d2: BitMatrix,
    d1: BitMatrix,
    labels2: Vec<Label>,
    labels1: Vec<Label>,
    labels0: Vec<Label>,
}

/// One violating pair found by [`ChainComplex2::validate_matrices`]: a C2
/// node and a C0 node whose neighborhoods overlap in an odd number of C1
/// nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainViolation {
    pub c2_index: usize,
    pub c0_index: usize,
}

/// Homology data for `H1 = ker d1 / im d2`.
#[derive(Clone, Debug)]
pub struct HomologyResult {
    /// `dim H1`.
    pub dimension: usize,
    /// Rows are coset representatives completing the boundary basis.
    pub representatives: BitMatrix,
    /// Rows are a basis of `im d2`.
    pub boundary_basis: BitMatrix,
    /// Rows are a basis of `ker d1`.
    pub cycle_basis: BitMatrix,
}

/// Cohomology data for `H^1 = ker d2ᵀ / im d1ᵀ`, mirroring [`HomologyResult`].
pub type CohomologyResult = HomologyResult;

impl ChainComplex2 {
    /// Builds and validates a complex. `d2` is `n1×n2` (columns are C2 basis
    /// images), `d1` is `n0×n1`.
    pub fn new(
        d2: BitMatrix,
        d1: BitMatrix,
        labels2: Vec<Label>,
        labels1: Vec<Label>,
        labels0: Vec<Label>,
    ) -> Result<Self, ComplexError> {
        if d1.cols() != d2.rows() {
            return Err(ComplexError::BoundaryShape {
                d2: d2.shape(),
                d1: d1.shape(),
            });
        }
        for (space, expected, got) in [
            ("C2", d2.cols(), labels2.len()),
            ("C1", d2.rows(), labels1.len()),
            ("C0", d1.rows(), labels0.len()),
        ] {
            if expected != got {
                return Err(ComplexError::LabelCount {
                    space,
                    expected,
                    got,
                });
            }
        }
        let violations = Self::violations(&d1, &d2);
        if !violations.is_empty() {
            return Err(ComplexError::ChainCondition(violations.len()));
        }
        Ok(ChainComplex2 {
            d2,
            d1,
            labels2,
            labels1,
            labels0,
        })
    }

    /// Convenience constructor with default labels.
    pub fn from_boundaries(d2: BitMatrix, d1: BitMatrix) -> Result<Self, ComplexError> {
        let labels2 = (0..d2.cols())
            .map(|i| Label::new(format!("g{i}"), NodeKind::Gauge))
            .collect();
        let labels1 = (0..d2.rows())
            .map(|i| Label::new(format!("e{i}"), NodeKind::ErrorGeneric))
            .collect();
        let labels0 = (0..d1.rows())
            .map(|i| Label::new(format!("c{i}"), NodeKind::Detector))
            .collect();
        Self::new(d2, d1, labels2, labels1, labels0)
    }

    fn violations(d1: &BitMatrix, d2: &BitMatrix) -> Vec<ChainViolation> {
        let product = d1.multiply(d2).expect("shapes checked");
        let mut out = Vec::new();
        for c0 in 0..product.rows() {
            for c2 in 0..product.cols() {
                if product.get(c0, c2) {
                    out.push(ChainViolation {
                        c2_index: c2,
                        c0_index: c0,
                    });
                }
            }
        }
        out
    }

    /// Checks the chain condition on arbitrary candidate boundaries and
    /// reports every violating (C2, C0) pair.
    pub fn validate_matrices(d2: &BitMatrix, d1: &BitMatrix) -> Vec<ChainViolation> {
        Self::violations(d1, d2)
    }

    pub fn d2(&self) -> &BitMatrix {
        &self.d2
    }

    pub fn d1(&self) -> &BitMatrix {
        &self.d1
    }

    pub fn dim_c2(&self) -> usize {
        self.d2.cols()
    }

    pub fn dim_c1(&self) -> usize {
        self.d2.rows()
    }

    pub fn dim_c0(&self) -> usize {
        self.d1.rows()
    }

    pub fn labels2(&self) -> &[Label] {
        &self.labels2
    }

    pub fn labels1(&self) -> &[Label] {
        &self.labels1
    }

    pub fn labels0(&self) -> &[Label] {
        &self.labels0
    }

    /// `dim H1 = dim ker d1 − rank d2`.
    pub fn homology_dimension(&self) -> usize {
        self.dim_c1() - self.d1.rank() - self.d2.rank()
    }

    /// Homology `H1 = ker d1 / im d2` with explicit representatives.
    pub fn homology(&self) -> HomologyResult {
        Self::quotient(&self.d1, &self.d2.transpose())
    }

    /// Cohomology `H^1 = ker d2ᵀ / im d1ᵀ` with explicit representatives.
    pub fn cohomology(&self) -> CohomologyResult {
        Self::quotient(&self.d2.transpose(), &self.d1)
    }

    /// Shared quotient-space computation: cycles are `ker out_map`, the
    /// boundary space is the rowspace of `boundary_rows`.
    fn quotient(out_map: &BitMatrix, boundary_rows: &BitMatrix) -> HomologyResult {
        let cycle_basis = out_map.kernel_basis();
        let boundary_basis = boundary_rows.row_basis();
        // Complete the boundary basis to the cycle space; surplus rows are
        // the coset representatives.
        let mut span = boundary_basis.clone();
        let mut reps: Vec<BitVector> = Vec::new();
        for r in 0..cycle_basis.rows() {
            let candidate = cycle_basis.row(r);
            if !span.rowspace_contains(&candidate) {
                span = span
                    .vstack(&BitMatrix::from_rows(
                        std::slice::from_ref(&candidate),
                        candidate.len(),
                    ))
                    .expect("widths match");
                reps.push(candidate);
            }
        }
        HomologyResult {
            dimension: reps.len(),
            representatives: BitMatrix::from_rows(&reps, out_map.cols()),
            boundary_basis,
            cycle_basis,
        }
    }

    /// The intersection pairing `Φ(f, x) = fᵀ·x` between a cocycle and a
    /// cycle. The value depends only on the (co)homology classes.
    pub fn intersection_form(&self, f: &BitVector, x: &BitVector) -> Result<bool, ComplexError> {
        let fd2 = self
            .d2
            .transpose()
            .mul_vec(f)
            .map_err(ComplexError::Gf2)?;
        if !fd2.is_zero() {
            return Err(ComplexError::NotInSubspace {
                context: "intersection_form",
                expected: "cocycle (ker d2ᵀ)",
            });
        }
        let d1x = self.d1.mul_vec(x).map_err(ComplexError::Gf2)?;
        if !d1x.is_zero() {
            return Err(ComplexError::NotInSubspace {
                context: "intersection_form",
                expected: "cycle (ker d1)",
            });
        }
        Ok(f.dot(x))
    }

    /// Dual bases `{e^j}` (cohomology) and `{e_k}` (homology) with
    /// `Φ(e^j, e_k) = δ_jk`, obtained by inverting the pairing matrix of the
    /// canonical representative bases.
    pub fn dual_bases(&self) -> (BitMatrix, BitMatrix) {
        let hom = self.homology();
        let coh = self.cohomology();
        let k = hom.dimension;
        debug_assert_eq!(k, coh.dimension, "H1 and H^1 dimensions must agree");
        if k == 0 {
            return (
                BitMatrix::zeros(0, self.dim_c1()),
                BitMatrix::zeros(0, self.dim_c1()),
            );
        }
        // Pairing matrix P[j][k] = Φ(f_j, e_k); non-degenerate, so P is
        // invertible and P⁻¹·F pairs as the identity.
        let pairing = coh
            .representatives
            .multiply(&hom.representatives.transpose())
            .expect("widths match");
        let rr = pairing.row_reduce();
        debug_assert_eq!(rr.rank, k, "intersection pairing must be non-degenerate");
        let dual_cohomology = rr
            .transform
            .multiply(&coh.representatives)
            .expect("shapes match");
        (dual_cohomology, hom.representatives)
    }

    /// The distance: minimum weight over `ker d1 \ im d2`, by Gray-code
    /// enumeration of the cycle space with a boundary-membership test.
    pub fn distance(&self, cap: usize) -> Result<usize, ComplexError> {
        if self.homology_dimension() == 0 {
            return Err(ComplexError::NoLogical);
        }
        let cycles = self.d1.kernel_basis();
        if cycles.rows() > cap {
            return Err(ComplexError::Overflow {
                dim: cycles.rows(),
                cap,
            });
        }
        let boundary_tester = SpanTester::new(&self.d2.transpose());
        let mut best = usize::MAX;
        gray_walk_rowspace(&cycles, |v| {
            let w = v.weight();
            if w < best && !boundary_tester.contains(v) {
                best = w;
            }
        });
        debug_assert_ne!(best, usize::MAX);
        Ok(best)
    }

    /// Minimum-weight decoding: the minimum weight and the lexicographically
    /// smallest minimum-weight `x` with `d1·x = s`.
    pub fn mwd(&self, s: &BitVector, cap: usize) -> Result<(usize, BitVector), ComplexError> {
        let Some(x0) = self.d1.solve(s).map_err(ComplexError::Gf2)? else {
            return Err(ComplexError::InfeasibleSyndrome);
        };
        let cycles = self.d1.kernel_basis();
        if cycles.rows() > cap {
            return Err(ComplexError::Overflow {
                dim: cycles.rows(),
                cap,
            });
        }
        let mut best = x0.clone();
        let mut consider = |v: &BitVector| {
            match v.weight().cmp(&best.weight()) {
                Ordering::Less => best = v.clone(),
                Ordering::Equal => {
                    if lex_less(v, &best) {
                        best = v.clone();
                    }
                }
                Ordering::Greater => {}
            }
        };
        let mut current = x0.clone();
        gray_walk_rowspace(&cycles, |delta| {
            // `delta` already includes the full Gray combination; rebuild the
            // candidate from the particular solution.
            current = x0.clone();
            current.xor_assign(delta);
            consider(&current);
        });
        let weight = best.weight();
        Ok((weight, best))
    }

    /// Connected components of the incidence graph (C2–C1 edges from d2,
    /// C1–C0 edges from d1). Each component lists its node indices per space,
    /// ascending; components are sorted by their smallest C1 node.
    pub fn connected_components(&self) -> Vec<Component> {
        let (n2, n1, n0) = (self.dim_c2(), self.dim_c1(), self.dim_c0());
        let total = n2 + n1 + n0;
        let mut dsu = Dsu::new(total);
        for c2 in 0..n2 {
            for c1 in 0..n1 {
                if self.d2.get(c1, c2) {
                    dsu.union(c2, n2 + c1);
                }
            }
        }
        for c0 in 0..n0 {
            for c1 in 0..n1 {
                if self.d1.get(c0, c1) {
                    dsu.union(n2 + n1 + c0, n2 + c1);
                }
            }
        }
        let mut components: Vec<Component> = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; total];
        for node in 0..total {
            let r = dsu.find(node);
            let idx = match root_of[r] {
                Some(i) => i,
                None => {
                    root_of[r] = Some(components.len());
                    components.push(Component::default());
                    components.len() - 1
                }
            };
            if node < n2 {
                components[idx].c2.push(node);
            } else if node < n2 + n1 {
                components[idx].c1.push(node - n2);
            } else {
                components[idx].c0.push(node - n2 - n1);
            }
        }
        components
    }

    /// Restricts the complex to one connected component.
    pub fn subcomplex(&self, component: &Component) -> ChainComplex2 {
        let d2 = self
            .d2
            .select_rows(&component.c1)
            .select_columns(&component.c2);
        let d1 = self
            .d1
            .select_rows(&component.c0)
            .select_columns(&component.c1);
        ChainComplex2 {
            d2,
            d1,
            labels2: component.c2.iter().map(|&i| self.labels2[i].clone()).collect(),
            labels1: component.c1.iter().map(|&i| self.labels1[i].clone()).collect(),
            labels0: component.c0.iter().map(|&i| self.labels0[i].clone()).collect(),
        }
    }

    /// Graphviz DOT export of the incidence graph: boxes for generators,
    /// circles for error nodes (filled = Z type, open = X type), triangles
    /// for detectors.
    pub fn to_dot(&self) -> String {
        use std::fmt::Write as _;
        let attrs = |kind: NodeKind| match kind {
            NodeKind::Gauge => "shape=box",
            NodeKind::ErrorX => "shape=circle",
            NodeKind::ErrorZ => "shape=circle style=filled fillcolor=gray",
            NodeKind::ErrorGeneric => "shape=circle style=dashed",
            NodeKind::Detector => "shape=triangle",
        };
        let mut out = String::from("graph complex {\n");
        for (prefix, labels) in [("g", &self.labels2), ("e", &self.labels1), ("c", &self.labels0)]
        {
            for (i, label) in labels.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  {prefix}{i} [label=\"{}\" {}];",
                    label.name,
                    attrs(label.kind)
                );
            }
        }
        for j in 0..self.d2.cols() {
            for i in 0..self.d2.rows() {
                if self.d2.get(i, j) {
                    let _ = writeln!(out, "  g{j} -- e{i};");
                }
            }
        }
        for j in 0..self.d1.cols() {
            for i in 0..self.d1.rows() {
                if self.d1.get(i, j) {
                    let _ = writeln!(out, "  e{j} -- c{i};");
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// Serializes to the sparse JSON schema.
    pub fn to_json(&self) -> String {
        let doc = ComplexJson::from(self);
        serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
    }

    /// Parses the sparse JSON schema.
    pub fn from_json(text: &str) -> Result<Self, ComplexError> {
        let doc: ComplexJson =
            serde_json::from_str(text).map_err(|e| ComplexError::Json(e.to_string()))?;
        doc.try_into()
    }
}

/// One connected component of a complex's incidence graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Component {
    pub c2: Vec<usize>,
    pub c1: Vec<usize>,
    pub c0: Vec<usize>,
}

/// Lexicographic order on bit strings read from index 0 upward: `a < b` when
/// `a` has a 0 at the first differing index.
pub fn lex_less(a: &BitVector, b: &BitVector) -> bool {
    debug_assert_eq!(a.len(), b.len());
    for i in 0..a.len() {
        match (a.get(i), b.get(i)) {
            (false, true) => return true,
            (true, false) => return false,
            _ => {}
        }
    }
    false
}

/// Membership tester for the rowspace of a fixed matrix, backed by a
/// precomputed reduced row-echelon form.
pub struct SpanTester {
    rref_rows: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl SpanTester {
    /// Precomputes the RREF of `rows`.
    pub fn new(rows: &BitMatrix) -> Self {
        let rr = rows.row_reduce();
        let rref_rows = (0..rr.rank).map(|r| rr.reduced.row(r)).collect();
        SpanTester {
            rref_rows,
            pivots: rr.pivots,
        }
    }

    /// True when `v` lies in the spanned rowspace.
    pub fn contains(&self, v: &BitVector) -> bool {
        let mut residue = v.clone();
        for (row, &p) in self.rref_rows.iter().zip(&self.pivots) {
            if residue.get(p) {
                residue.xor_assign(row);
            }
        }
        residue.is_zero()
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Sparse JSON schema for [`ChainComplex2`].
#[derive(Serialize, Deserialize)]
struct ComplexJson {
    n2: usize,
    n1: usize,
    n0: usize,
    /// Per C2 element: indices of its C1 neighbors (column supports of d2).
    d2: Vec<Vec<usize>>,
    /// Per C0 element: indices of its C1 neighbors (row supports of d1).
    d1: Vec<Vec<usize>>,
    labels: LabelsJson,
}

#[derive(Serialize, Deserialize)]
struct LabelsJson {
    c2: Vec<Label>,
    c1: Vec<Label>,
    c0: Vec<Label>,
}

impl From<&ChainComplex2> for ComplexJson {
    fn from(c: &ChainComplex2) -> Self {
        ComplexJson {
            n2: c.dim_c2(),
            n1: c.dim_c1(),
            n0: c.dim_c0(),
            d2: (0..c.dim_c2()).map(|j| c.d2.col(j).support()).collect(),
            d1: (0..c.dim_c0()).map(|i| c.d1.row(i).support()).collect(),
            labels: LabelsJson {
                c2: c.labels2.clone(),
                c1: c.labels1.clone(),
                c0: c.labels0.clone(),
            },
        }
    }
}

impl TryFrom<ComplexJson> for ChainComplex2 {
    type Error = ComplexError;

    fn try_from(doc: ComplexJson) -> Result<Self, ComplexError> {
        let mut d2 = BitMatrix::zeros(doc.n1, doc.n2);
        for (j, support) in doc.d2.iter().enumerate() {
            if j >= doc.n2 {
                return Err(ComplexError::Json("too many d2 columns".into()));
            }
            for &i in support {
                if i >= doc.n1 {
                    return Err(ComplexError::Json(format!("d2 index {i} out of range")));
                }
                d2.set(i, j, true);
            }
        }
        let mut d1 = BitMatrix::zeros(doc.n0, doc.n1);
        for (i, support) in doc.d1.iter().enumerate() {
            if i >= doc.n0 {
                return Err(ComplexError::Json("too many d1 rows".into()));
            }
            for &j in support {
                if j >= doc.n1 {
                    return Err(ComplexError::Json(format!("d1 index {j} out of range")));
                }
                d1.set(i, j, true);
            }
        }
        ChainComplex2::new(d2, d1, doc.labels.c2, doc.labels.c1, doc.labels.c0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn repetition3() -> ChainComplex2 {
        let d2 = BitMatrix::zeros(3, 0);
        let d1 = BitMatrix::from_bits(&[&[1, 1, 0], &[0, 1, 1]]);
        ChainComplex2::from_boundaries(d2, d1).unwrap()
    }

    #[test]
    fn repetition_code_distance_is_three() {
        let c = repetition3();
        assert_eq!(c.homology_dimension(), 1);
        assert_eq!(c.distance(24).unwrap(), 3);
    }

    #[test]
    fn repetition_code_mwd() {
        let c = repetition3();
        let (w, x) = c.mwd(&BitVector::parse("10").unwrap(), 24).unwrap();
        assert_eq!(w, 1);
        assert_eq!(x, BitVector::parse("100").unwrap());
    }

    #[test]
    fn json_round_trip() {
        let c = repetition3();
        let parsed = ChainComplex2::from_json(&c.to_json()).unwrap();
        assert_eq!(parsed, c);
    }
}
