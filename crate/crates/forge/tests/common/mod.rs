//! Shared helpers for the integration suites: random generators for
//! complexes, circuits, and patterns; brute-force decoding oracles; and a
//! typed graph-isomorphism check for incidence graphs.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spacetime_forge::circuit::{CircuitElement, CliffordCircuit, MeasBasis};
use spacetime_forge::complex::{ChainComplex2, Label, NodeKind};
use spacetime_forge::gf2::{BitMatrix, BitVector};
use spacetime_forge::mbqc::MbqcPattern;
use spacetime_forge::pauli::PauliOp;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_bitvector(rng: &mut ChaCha8Rng, len: usize) -> BitVector {
    let mut v = BitVector::zeros(len);
    for i in 0..len {
        v.set(i, rng.gen_bool(0.5));
    }
    v
}

/// A random two-term chain complex: `d2` is arbitrary and the rows of `d1`
/// are drawn from the kernel of `d2ᵀ`, so `d1·d2 = 0` by construction.
pub fn random_complex(rng: &mut ChaCha8Rng, max_c1: usize) -> ChainComplex2 {
    loop {
        let n1 = rng.gen_range(2..=max_c1);
        let n2 = rng.gen_range(1..=n1);
        let mut d2 = BitMatrix::zeros(n1, n2);
        for c in 0..n2 {
            for r in 0..n1 {
                d2.set(r, c, rng.gen_bool(0.4));
            }
        }
        let candidates = d2.transpose().kernel_basis();
        if candidates.rows() == 0 {
            continue;
        }
        let n0 = rng.gen_range(1..=candidates.rows());
        let rows: Vec<BitVector> = (0..n0)
            .map(|_| {
                let mut row = BitVector::zeros(n1);
                for k in 0..candidates.rows() {
                    if rng.gen_bool(0.5) {
                        row.xor_assign(&candidates.row(k));
                    }
                }
                row
            })
            .collect();
        let d1 = BitMatrix::from_rows(&rows, n1);
        let labels2 = (0..n2)
            .map(|i| Label::new(format!("g{i}"), NodeKind::Gauge))
            .collect();
        let labels1 = (0..n1)
            .map(|i| Label::new(format!("e{i}"), NodeKind::ErrorGeneric))
            .collect();
        let labels0 = (0..n0)
            .map(|i| Label::new(format!("c{i}"), NodeKind::Detector))
            .collect();
        return ChainComplex2::new(d2, d1, labels2, labels1, labels0)
            .expect("kernel construction satisfies the chain condition");
    }
}

/// Brute-force distance: minimum weight over `ker d1` minus the column
/// space of `d2`, by enumerating all of `F2^{n1}`. Returns `None` when the
/// homology is trivial.
pub fn naive_distance(c: &ChainComplex2) -> Option<usize> {
    let n1 = c.dim_c1();
    assert!(n1 <= 20, "oracle is exponential in dim C1");
    let boundaries = c.d2().transpose();
    let mut best: Option<usize> = None;
    for bits in 0u64..(1 << n1) {
        let v = bits_to_vector(bits, n1);
        if !c.d1().mul_vec(&v).expect("widths match").is_zero() {
            continue;
        }
        if boundaries.rowspace_contains(&v) {
            continue;
        }
        let w = v.weight();
        if best.map_or(true, |b| w < b) {
            best = Some(w);
        }
    }
    best
}

/// Brute-force minimum-weight decoding: the lexicographically smallest
/// minimum-weight `x` with `d1·x = s`, or `None` when infeasible.
pub fn naive_mwd(c: &ChainComplex2, s: &BitVector) -> Option<(usize, BitVector)> {
    let n1 = c.dim_c1();
    assert!(n1 <= 20, "oracle is exponential in dim C1");
    let mut best: Option<BitVector> = None;
    for bits in 0u64..(1 << n1) {
        let v = bits_to_vector(bits, n1);
        if &c.d1().mul_vec(&v).expect("widths match") != s {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                v.weight() < b.weight()
                    || (v.weight() == b.weight()
                        && spacetime_forge::complex::lex_less(&v, b))
            }
        };
        if better {
            best = Some(v);
        }
    }
    best.map(|v| (v.weight(), v))
}

fn bits_to_vector(bits: u64, len: usize) -> BitVector {
    let mut v = BitVector::zeros(len);
    for i in 0..len {
        v.set(i, (bits >> i) & 1 == 1);
    }
    v
}

/// All syndromes reachable by some error, i.e. the column space of `d1`,
/// enumerated through all error vectors (only sensible for small dim C1).
pub fn all_syndromes(c: &ChainComplex2) -> Vec<BitVector> {
    let mut seen: Vec<BitVector> = Vec::new();
    for bits in 0u64..(1 << c.dim_c1()) {
        let v = bits_to_vector(bits, c.dim_c1());
        let s = c.d1().mul_vec(&v).expect("widths match");
        if !seen.contains(&s) {
            seen.push(s);
        }
    }
    seen
}

/// One node of the typed incidence graph of a complex.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    C2,
    C1,
    C0,
}

struct TypedGraph {
    parts: Vec<Part>,
    adj: Vec<Vec<usize>>,
}

fn typed_graph(c: &ChainComplex2) -> TypedGraph {
    let (n2, n1, n0) = (c.dim_c2(), c.dim_c1(), c.dim_c0());
    let total = n2 + n1 + n0;
    let mut parts = Vec::with_capacity(total);
    parts.extend(std::iter::repeat(Part::C2).take(n2));
    parts.extend(std::iter::repeat(Part::C1).take(n1));
    parts.extend(std::iter::repeat(Part::C0).take(n0));
    let mut adj = vec![Vec::new(); total];
    for g in 0..n2 {
        for e in 0..n1 {
            if c.d2().get(e, g) {
                adj[g].push(n2 + e);
                adj[n2 + e].push(g);
            }
        }
    }
    for s in 0..n0 {
        for e in 0..n1 {
            if c.d1().get(s, e) {
                adj[n2 + n1 + s].push(n2 + e);
                adj[n2 + e].push(n2 + n1 + s);
            }
        }
    }
    TypedGraph { parts, adj }
}

/// Whether the incidence graphs of two complexes are isomorphic under a
/// bijection that preserves the C2/C1/C0 partition. Backtracking search,
/// suitable for the small graphs in the test corpus.
pub fn graph_isomorphic(a: &ChainComplex2, b: &ChainComplex2) -> bool {
    if a.dim_c2() != b.dim_c2() || a.dim_c1() != b.dim_c1() || a.dim_c0() != b.dim_c0() {
        return false;
    }
    let ga = typed_graph(a);
    let gb = typed_graph(b);
    let n = ga.parts.len();
    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    fn extend(
        ga: &TypedGraph,
        gb: &TypedGraph,
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        next: usize,
    ) -> bool {
        if next == ga.parts.len() {
            return true;
        }
        for cand in 0..gb.parts.len() {
            if used[cand]
                || gb.parts[cand] != ga.parts[next]
                || gb.adj[cand].len() != ga.adj[next].len()
            {
                continue;
            }
            // Consistency with already-mapped neighbors.
            let ok = ga.adj[next].iter().all(|&u| match map[u] {
                Some(mu) => gb.adj[cand].contains(&mu),
                None => true,
            });
            if !ok {
                continue;
            }
            map[next] = Some(cand);
            used[cand] = true;
            if extend(ga, gb, map, used, next + 1) {
                return true;
            }
            map[next] = None;
            used[cand] = false;
        }
        false
    }
    extend(&ga, &gb, &mut map, &mut used, 0)
}

/// A random normalized circuit over `n ≤ max_n` wires and `≤ max_cols`
/// gate columns, drawn from the full element grammar.
pub fn random_circuit(rng: &mut ChaCha8Rng, max_n: usize, max_cols: usize) -> CliffordCircuit {
    let n = rng.gen_range(1..=max_n);
    let cols = rng.gen_range(1..=max_cols);
    let mut columns: Vec<Vec<CircuitElement>> = Vec::new();
    for _ in 0..cols {
        let mut col = Vec::new();
        let mut free: Vec<usize> = (0..n).collect();
        while !free.is_empty() && rng.gen_bool(0.8) {
            let w = free.remove(rng.gen_range(0..free.len()));
            let choice = rng.gen_range(0..5);
            match choice {
                0 => col.push(CircuitElement::H(w)),
                1 => col.push(CircuitElement::S(w)),
                2 => col.push(CircuitElement::Hs(w)),
                3 if !free.is_empty() => {
                    let v = free.remove(rng.gen_range(0..free.len()));
                    col.push(CircuitElement::Cz(w, v));
                }
                _ => {
                    // A measurement column on a random Pauli over the free
                    // wires plus this one.
                    let mut x = BitVector::zeros(n);
                    let mut z = BitVector::zeros(n);
                    loop {
                        x.set(w, rng.gen_bool(0.5));
                        z.set(w, rng.gen_bool(0.5));
                        if x.get(w) || z.get(w) {
                            break;
                        }
                    }
                    col.push(CircuitElement::MeasurePauli(
                        PauliOp::from_parts(x, z).expect("equal lengths"),
                    ));
                }
            }
        }
        columns.push(col);
    }
    let mut final_meas: Vec<(usize, MeasBasis)> = Vec::new();
    for w in 0..n {
        if rng.gen_bool(0.3) {
            let basis = if rng.gen_bool(0.5) {
                MeasBasis::X
            } else {
                MeasBasis::Y
            };
            final_meas.push((w, basis));
        }
    }
    CliffordCircuit::new(n, columns, std::iter::empty(), final_meas, Vec::new())
        .expect("columns are wire-disjoint by construction")
        .normalize()
}

/// Whether the operator's component at each measurement column commutes
/// with the measured Pauli. Exactly then does the gauge group provide the
/// centralizer pairs needed to decompose a spackle or backle crossing
/// that column.
pub fn measurement_compatible(
    c: &CliffordCircuit,
    op: &spacetime_forge::circuit::SpacetimeOperator,
) -> bool {
    for (col, elems) in c.columns().iter().enumerate() {
        let u = col + 1;
        for e in elems {
            if let CircuitElement::MeasurePauli(q) = e {
                if !op.at_time(u).commutes(q) {
                    return false;
                }
            }
        }
    }
    true
}

/// A random MBQC pattern on at most `max_nodes` nodes with disjoint input
/// and output sets and no input stabilizers.
pub fn random_pattern(rng: &mut ChaCha8Rng, max_nodes: usize) -> MbqcPattern {
    let n = rng.gen_range(2..=max_nodes);
    let mut a = BitMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                a.set(i, j, true);
                a.set(j, i, true);
            }
        }
    }
    let mut wires: Vec<usize> = (0..n).collect();
    let inputs: Vec<usize> = (0..rng.gen_range(0..=n.min(2)))
        .map(|_| wires.remove(rng.gen_range(0..wires.len())))
        .collect();
    let outputs: Vec<usize> = (0..rng.gen_range(0..=wires.len().min(2)))
        .map(|_| wires.remove(rng.gen_range(0..wires.len())))
        .collect();
    let mut b = BitVector::zeros(n);
    for w in 0..n {
        if !outputs.contains(&w) && rng.gen_bool(0.2) {
            b.set(w, true);
        }
    }
    MbqcPattern::new(
        a,
        inputs.iter().copied().collect::<std::collections::BTreeSet<_>>(),
        outputs.iter().copied().collect::<std::collections::BTreeSet<_>>(),
        b,
        Vec::new(),
    )
    .expect("construction respects the pattern invariants")
}
