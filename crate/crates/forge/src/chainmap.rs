//! Weak chain maps between length-2 complexes, fault-tolerance
//! certification, and the local reduction rules A and B with a fixpoint
//! reduction engine.
//!
//! Rule A removes a C2 node whose boundary has weight 2 and merges its two
//! C1 neighbors; rule B removes a C2 node of boundary weight 1 together with
//! its single C1 neighbor. Both come with explicit forward/backward maps
//! that preserve homology, distance, and minimum decoding weights, which
//! [`certify_fault_tolerant`] checks directly.

use crate::complex::{ChainComplex2, ComplexError, Label, NodeKind};
use crate::gf2::{BitMatrix, BitVector, Gf2Error};
use serde::Serialize;
use thiserror::Error;

/// A triple of GF(2) maps between the spaces of two complexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakChainMap {
    /// C2(src) → C2(dst).
    pub f2: BitMatrix,
    /// C1(src) → C1(dst).
    pub f1: BitMatrix,
    /// C0(src) → C0(dst).
    pub f0: BitMatrix,
}

impl WeakChainMap {
    /// The identity map on a complex.
    pub fn identity(c: &ChainComplex2) -> Self {
        WeakChainMap {
            f2: BitMatrix::identity(c.dim_c2()),
            f1: BitMatrix::identity(c.dim_c1()),
            f0: BitMatrix::identity(c.dim_c0()),
        }
    }

    /// Composition `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &WeakChainMap) -> Result<WeakChainMap, Gf2Error> {
        Ok(WeakChainMap {
            f2: other.f2.multiply(&self.f2)?,
            f1: other.f1.multiply(&self.f1)?,
            f0: other.f0.multiply(&self.f0)?,
        })
    }
}

/// Errors and failed checks from this module.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainMapError {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("image condition violated: f1·d2 column {0} is outside im d2'")]
    ImageCondition(usize),
    #[error("commuting square violated: f0·d1 ≠ d1'·f1")]
    CommutingSquare,
    #[error("gauge column {index} has weight {weight}, rule {rule:?} requires {required}")]
    WrongGaugeWeight {
        index: usize,
        weight: usize,
        rule: ReductionRule,
        required: usize,
    },
    #[error("complex is inconsistent: merged C1 nodes have different d1 columns")]
    InconsistentMerge,
    #[error("certification failed: {0}")]
    Certify(String),
}

/// Report from [`check_weak_chain_map`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapReport {
    /// True when additionally `f1·d2 = d2'·f2` holds exactly.
    pub strict: bool,
}

/// Verifies the two weak-chain-map conditions: `im(f1·d2) ⊆ im(d2')` and
/// `f0·d1 = d1'·f1`. Strict chain maps are reported via the flag.
pub fn check_weak_chain_map(
    m: &WeakChainMap,
    src: &ChainComplex2,
    dst: &ChainComplex2,
) -> Result<MapReport, ChainMapError> {
    let f1d2 = m.f1.multiply(src.d2())?;
    let dst_boundaries = dst.d2().transpose();
    for j in 0..f1d2.cols() {
        if !dst_boundaries.rowspace_contains(&f1d2.col(j)) {
            return Err(ChainMapError::ImageCondition(j));
        }
    }
    let lhs = m.f0.multiply(src.d1())?;
    let rhs = dst.d1().multiply(&m.f1)?;
    if lhs != rhs {
        return Err(ChainMapError::CommutingSquare);
    }
    let strict = f1d2 == dst.d2().multiply(&m.f2)?;
    Ok(MapReport { strict })
}

/// Result of [`induced_homology_map`]: the induced matrix on homology in the
/// destination's dual-basis coordinates, and whether it is an isomorphism.
#[derive(Clone, Debug)]
pub struct InducedMap {
    /// `matrix[j][k]` = j-th dual coordinate of `f1 · (k-th source class)`.
    pub matrix: BitMatrix,
    pub isomorphism: bool,
}

/// The map induced on `H1` by a weak chain map.
pub fn induced_homology_map(
    m: &WeakChainMap,
    src: &ChainComplex2,
    dst: &ChainComplex2,
) -> Result<InducedMap, ChainMapError> {
    check_weak_chain_map(m, src, dst)?;
    let src_hom = src.homology();
    let (dst_dual_coh, _) = dst.dual_bases();
    let k_src = src_hom.dimension;
    let k_dst = dst.homology_dimension();
    let mut matrix = BitMatrix::zeros(k_dst, k_src);
    for k in 0..k_src {
        let image = m.f1.mul_vec(&src_hom.representatives.row(k))?;
        debug_assert!(dst.d1().mul_vec(&image)?.is_zero(), "cycles map to cycles");
        for j in 0..k_dst {
            if dst_dual_coh.row(j).dot(&image) {
                matrix.set(j, k, true);
            }
        }
    }
    let isomorphism = k_src == k_dst && matrix.rank() == k_src;
    Ok(InducedMap {
        matrix,
        isomorphism,
    })
}

/// Successful output of [`certify_fault_tolerant`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// Common homology dimension.
    pub dim_h1: usize,
    /// Common distance, when `dim H1 > 0`.
    pub distance: Option<usize>,
    /// Number of syndromes whose decoding was compared.
    pub syndromes_checked: usize,
    /// True when syndromes were sampled instead of enumerated exhaustively
    /// ("sampled certificate").
    pub sampled: bool,
}

/// Certifies that `(f, h)` is a fault-tolerant pair between `src` and `dst`:
/// a weak quasi-isomorphism in both directions that preserves distance and
/// minimum decoding weight.
///
/// Checks, in order: both maps are weak chain maps; `f1∘h1` and `h1∘f1`
/// differ from the identity only by boundaries on every basis vector;
/// homology dimensions and distances agree; and for every syndrome `s` of
/// the source (exhaustive when `rank d1 ≤ cap`, otherwise 256 sampled
/// syndromes), `f1 · witness(src, s)` is a valid decoding of `f0·s` in the
/// destination with the destination's minimum weight.
pub fn certify_fault_tolerant(
    f: &WeakChainMap,
    h: &WeakChainMap,
    src: &ChainComplex2,
    dst: &ChainComplex2,
    cap: usize,
) -> Result<Certificate, ChainMapError> {
    check_weak_chain_map(f, src, dst)?;
    check_weak_chain_map(h, dst, src)?;

    // Quasi-isomorphism hypotheses: [f1(h1(x))] = [x] and [h1(f1(x))] = [x]
    // on spanning sets.
    let round_trip = |a: &BitMatrix, b: &BitMatrix, boundaries: &BitMatrix, what: &str| {
        let composed = a.multiply(b)?;
        let span = boundaries.transpose();
        for i in 0..composed.cols() {
            let mut v = composed.col(i);
            v.flip(i);
            if !span.rowspace_contains(&v) {
                return Err(ChainMapError::Certify(format!(
                    "{what} differs from identity by a non-boundary on basis vector {i}"
                )));
            }
        }
        Ok(())
    };
    round_trip(&f.f1, &h.f1, dst.d2(), "f1∘h1")?;
    round_trip(&h.f1, &f.f1, src.d2(), "h1∘f1")?;

    let dim_src = src.homology_dimension();
    let dim_dst = dst.homology_dimension();
    if dim_src != dim_dst {
        return Err(ChainMapError::Certify(format!(
            "homology dimensions differ: {dim_src} vs {dim_dst}"
        )));
    }
    let distance = if dim_src > 0 {
        let d_src = src.distance(cap)?;
        let d_dst = dst.distance(cap)?;
        if d_src != d_dst {
            return Err(ChainMapError::Certify(format!(
                "distances differ: {d_src} vs {d_dst}"
            )));
        }
        Some(d_src)
    } else {
        None
    };

    // Decoding preservation over syndromes of the source.
    let syndrome_basis = src.d1().transpose().row_basis();
    let rank = syndrome_basis.rows();
    let (syndromes, sampled) = if rank <= cap.min(16) {
        let mut all = vec![BitVector::zeros(src.dim_c0())];
        let mut current = BitVector::zeros(src.dim_c0());
        crate::gf2::gray_walk_rowspace(&syndrome_basis, |v| {
            current = v.clone();
            all.push(current.clone());
        });
        (all, false)
    } else {
        let mut rng = SplitMix64::new(0x5eed_cafe_f00d_0001);
        let mut all = Vec::with_capacity(256);
        for _ in 0..256 {
            let mut s = BitVector::zeros(src.dim_c0());
            for r in 0..rank {
                if rng.next_bool() {
                    s.xor_assign(&syndrome_basis.row(r));
                }
            }
            all.push(s);
        }
        (all, true)
    };
    for s in &syndromes {
        let (_, witness) = src.mwd(s, cap)?;
        let fs = f.f0.mul_vec(s)?;
        let image = f.f1.mul_vec(&witness)?;
        if dst.d1().mul_vec(&image)? != fs {
            return Err(ChainMapError::Certify(format!(
                "mapped witness has wrong syndrome for s = {s}"
            )));
        }
        let (w_dst, _) = dst.mwd(&fs, cap)?;
        if w_dst != image.weight() {
            return Err(ChainMapError::Certify(format!(
                "decoding weight changed for s = {s}: {} vs {w_dst}",
                image.weight()
            )));
        }
    }
    Ok(Certificate {
        dim_h1: dim_src,
        distance,
        syndromes_checked: syndromes.len(),
        sampled,
    })
}

/// Which local reduction was applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionRule {
    /// Weight-2 gauge column: merge the two C1 neighbors.
    A,
    /// Weight-1 gauge column: delete the gauge node and its neighbor.
    B,
    /// Weight-0 gauge column (self-pairing left over from earlier merges):
    /// drop the gauge node outright.
    Trivial,
}

/// One applied reduction step with its certified maps.
#[derive(Clone, Debug)]
pub struct RuleApplication {
    pub rule: ReductionRule,
    /// Index of the removed C2 node in the complex the rule was applied to.
    pub gauge_index: usize,
    pub gauge_label: String,
    /// C1 indices merged (rule A) or removed (rule B), in the source complex.
    pub c1_indices: Vec<usize>,
    /// Labels of the affected C1 nodes.
    pub affected_labels: Vec<String>,
    /// Map from the source complex onto the reduced complex.
    pub forward: WeakChainMap,
    /// Map from the reduced complex back into the source.
    pub backward: WeakChainMap,
}

/// Serializable trace entry: `{rule, gauge_label, affected_labels}`.
#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub rule: ReductionRule,
    pub gauge_label: String,
    pub affected_labels: Vec<String>,
}

impl From<&RuleApplication> for TraceEntry {
    fn from(app: &RuleApplication) -> Self {
        TraceEntry {
            rule: app.rule,
            gauge_label: app.gauge_label.clone(),
            affected_labels: app.affected_labels.clone(),
        }
    }
}

fn identity_without_column(n: usize, skip: usize) -> BitMatrix {
    // (n-1)×n: identity on the remaining indices, zero column at `skip`.
    let mut m = BitMatrix::zeros(n - 1, n);
    for old in 0..n {
        if old == skip {
            continue;
        }
        let new = if old < skip { old } else { old - 1 };
        m.set(new, old, true);
    }
    m
}

fn identity_without_row(n: usize, skip: usize) -> BitMatrix {
    identity_without_column(n, skip).transpose()
}

/// Applies rule A at the given C2 index (boundary weight exactly 2): the
/// gauge node is removed and its two C1 neighbors are merged.
pub fn apply_rule_a(
    c: &ChainComplex2,
    gauge: usize,
) -> Result<(ChainComplex2, RuleApplication), ChainMapError> {
    let col = c.d2().col(gauge);
    let support = col.support();
    if support.len() != 2 {
        return Err(ChainMapError::WrongGaugeWeight {
            index: gauge,
            weight: support.len(),
            rule: ReductionRule::A,
            required: 2,
        });
    }
    let (i, j) = (support[0], support[1]);
    if c.d1().col(i) != c.d1().col(j) {
        // The chain condition forces equal d1 columns; anything else means
        // the input complex was corrupted.
        return Err(ChainMapError::InconsistentMerge);
    }
    let (n2, n1) = (c.dim_c2(), c.dim_c1());

    // f1 merges e_j into e_i; h1 embeds the merged node back at position i.
    let mut f1 = identity_without_column(n1, j);
    let new_i = if i < j { i } else { i - 1 };
    f1.set(new_i, j, true);
    let f2 = identity_without_column(n2, gauge);
    let h1 = identity_without_row(n1, j);
    let h2 = identity_without_row(n2, gauge);

    let d2_new = f1
        .multiply(c.d2())?
        .select_columns(&(0..n2).filter(|&k| k != gauge).collect::<Vec<_>>());
    let d1_new = c
        .d1()
        .select_columns(&(0..n1).filter(|&k| k != j).collect::<Vec<_>>());

    let mut labels1: Vec<Label> = Vec::with_capacity(n1 - 1);
    for k in 0..n1 {
        if k == j {
            continue;
        }
        if k == i {
            let (a, b) = (&c.labels1()[i], &c.labels1()[j]);
            let kind = if a.kind == b.kind {
                a.kind
            } else {
                NodeKind::ErrorGeneric
            };
            labels1.push(Label::new(format!("{}+{}", a.name, b.name), kind));
        } else {
            labels1.push(c.labels1()[k].clone());
        }
    }
    let labels2: Vec<Label> = c
        .labels2()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != gauge)
        .map(|(_, l)| l.clone())
        .collect();
    let reduced = ChainComplex2::new(d2_new, d1_new, labels2, labels1, c.labels0().to_vec())?;
    let app = RuleApplication {
        rule: ReductionRule::A,
        gauge_index: gauge,
        gauge_label: c.labels2()[gauge].name.clone(),
        c1_indices: vec![i, j],
        affected_labels: vec![c.labels1()[i].name.clone(), c.labels1()[j].name.clone()],
        forward: WeakChainMap {
            f2,
            f1,
            f0: BitMatrix::identity(c.dim_c0()),
        },
        backward: WeakChainMap {
            f2: h2,
            f1: h1,
            f0: BitMatrix::identity(c.dim_c0()),
        },
    };
    Ok((reduced, app))
}

/// Applies rule B at the given C2 index (boundary weight exactly 1): the
/// gauge node and its single C1 neighbor are removed.
pub fn apply_rule_b(
    c: &ChainComplex2,
    gauge: usize,
) -> Result<(ChainComplex2, RuleApplication), ChainMapError> {
    let col = c.d2().col(gauge);
    let support = col.support();
    if support.len() != 1 {
        return Err(ChainMapError::WrongGaugeWeight {
            index: gauge,
            weight: support.len(),
            rule: ReductionRule::B,
            required: 1,
        });
    }
    let i = support[0];
    if !c.d1().col(i).is_zero() {
        // Guaranteed by the chain condition; checked defensively.
        return Err(ChainMapError::InconsistentMerge);
    }
    let (n2, n1) = (c.dim_c2(), c.dim_c1());
    let f1 = identity_without_column(n1, i);
    let f2 = identity_without_column(n2, gauge);
    let h1 = identity_without_row(n1, i);
    let h2 = identity_without_row(n2, gauge);

    let keep1: Vec<usize> = (0..n1).filter(|&k| k != i).collect();
    let keep2: Vec<usize> = (0..n2).filter(|&k| k != gauge).collect();
    let d2_new = c.d2().select_rows(&keep1).select_columns(&keep2);
    let d1_new = c.d1().select_columns(&keep1);
    let labels1: Vec<Label> = keep1.iter().map(|&k| c.labels1()[k].clone()).collect();
    let labels2: Vec<Label> = keep2.iter().map(|&k| c.labels2()[k].clone()).collect();
    let reduced = ChainComplex2::new(d2_new, d1_new, labels2, labels1, c.labels0().to_vec())?;
    let app = RuleApplication {
        rule: ReductionRule::B,
        gauge_index: gauge,
        gauge_label: c.labels2()[gauge].name.clone(),
        c1_indices: vec![i],
        affected_labels: vec![c.labels1()[i].name.clone()],
        forward: WeakChainMap {
            f2,
            f1,
            f0: BitMatrix::identity(c.dim_c0()),
        },
        backward: WeakChainMap {
            f2: h2,
            f1: h1,
            f0: BitMatrix::identity(c.dim_c0()),
        },
    };
    Ok((reduced, app))
}

/// Drops a weight-0 gauge column (the degenerate self-pairing case produced
/// by earlier merges).
fn drop_trivial_gauge(
    c: &ChainComplex2,
    gauge: usize,
) -> Result<(ChainComplex2, RuleApplication), ChainMapError> {
    let (n2, n1) = (c.dim_c2(), c.dim_c1());
    debug_assert!(c.d2().col(gauge).is_zero());
    let keep2: Vec<usize> = (0..n2).filter(|&k| k != gauge).collect();
    let d2_new = c.d2().select_columns(&keep2);
    let labels2: Vec<Label> = keep2.iter().map(|&k| c.labels2()[k].clone()).collect();
    let reduced = ChainComplex2::new(
        d2_new,
        c.d1().clone(),
        labels2,
        c.labels1().to_vec(),
        c.labels0().to_vec(),
    )?;
    let app = RuleApplication {
        rule: ReductionRule::Trivial,
        gauge_index: gauge,
        gauge_label: c.labels2()[gauge].name.clone(),
        c1_indices: Vec::new(),
        affected_labels: Vec::new(),
        forward: WeakChainMap {
            f2: identity_without_column(n2, gauge),
            f1: BitMatrix::identity(n1),
            f0: BitMatrix::identity(c.dim_c0()),
        },
        backward: WeakChainMap {
            f2: identity_without_row(n2, gauge),
            f1: BitMatrix::identity(n1),
            f0: BitMatrix::identity(c.dim_c0()),
        },
    };
    Ok((reduced, app))
}

/// Result of [`reduce_to_fixpoint`].
#[derive(Clone, Debug)]
pub struct Reduction {
    pub complex: ChainComplex2,
    /// Composite map from the original complex onto the fixpoint.
    pub forward: WeakChainMap,
    /// Composite map from the fixpoint back into the original.
    pub backward: WeakChainMap,
    pub trace: Vec<RuleApplication>,
}

impl Reduction {
    /// The serializable trace.
    pub fn trace_entries(&self) -> Vec<TraceEntry> {
        self.trace.iter().map(TraceEntry::from).collect()
    }
}

/// Applies rules A and B until no C2 column of weight ≤ 2 remains, scanning
/// C2 columns in ascending index and restarting after every application.
pub fn reduce_to_fixpoint(c: &ChainComplex2) -> Result<Reduction, ChainMapError> {
    let mut current = c.clone();
    let mut forward = WeakChainMap::identity(c);
    let mut backward = WeakChainMap::identity(c);
    let mut trace = Vec::new();
    'outer: loop {
        for gauge in 0..current.dim_c2() {
            let weight = current.d2().col(gauge).weight();
            let step = match weight {
                0 => drop_trivial_gauge(&current, gauge)?,
                1 => apply_rule_b(&current, gauge)?,
                2 => apply_rule_a(&current, gauge)?,
                _ => continue,
            };
            let (reduced, app) = step;
            forward = forward.then(&app.forward)?;
            backward = app.backward.then(&backward)?;
            trace.push(app);
            current = reduced;
            continue 'outer;
        }
        break;
    }
    Ok(Reduction {
        complex: current,
        forward,
        backward,
        trace,
    })
}

/// Tiny deterministic PRNG for sampled certification (no external state).
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A 4-bit repetition-style complex with one weight-2 gauge node.
    fn weight2_pattern() -> ChainComplex2 {
        // d2 column pairs the last two C1 nodes; both share d1 column (0,1).
        let d2 = BitMatrix::from_bits(&[&[0], &[0], &[1], &[1]]);
        let d1 = BitMatrix::from_bits(&[&[1, 1, 0, 0], &[0, 1, 1, 1]]);
        ChainComplex2::from_boundaries(d2, d1).unwrap()
    }

    #[test]
    fn rule_a_certifies() {
        let c = weight2_pattern();
        let (reduced, app) = apply_rule_a(&c, 0).unwrap();
        assert_eq!(reduced.dim_c1(), 3);
        let cert = certify_fault_tolerant(&app.forward, &app.backward, &c, &reduced, 24).unwrap();
        assert!(!cert.sampled);
        assert_eq!(cert.dim_h1, c.homology_dimension());
    }

    #[test]
    fn identity_map_is_strict() {
        let c = weight2_pattern();
        let m = WeakChainMap::identity(&c);
        let report = check_weak_chain_map(&m, &c, &c).unwrap();
        assert!(report.strict);
    }
}
