//! Dense bit-packed linear algebra over GF(2).
//!
//! Every other module in the crate reduces to the primitives defined here:
//! matrix products, reduced row-echelon form with an invertible transform,
//! kernel bases, linear solves, and subspace sums/intersections. All values
//! are immutable in spirit: operations return fresh values and never mutate
//! their inputs, so they are safe to share across threads.
//!
//! Pivoting is deterministic (first nonzero column, first available row), so
//! every derived basis is reproducible bit-for-bit.

use std::fmt;
use thiserror::Error;

/// Number of bits per storage word.
const WORD_BITS: usize = 64;

/// Errors produced by shape-checked GF(2) operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    /// Operand dimensions are incompatible.
    #[error("shape mismatch: {context} (left {left:?}, right {right:?})")]
    Shape {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
}

/// A fixed-length vector of bits. Bits beyond `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    /// The all-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// Builds a vector from an iterator of bits.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = BitVector::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            v.set(i, *b);
        }
        v
    }

    /// Builds a vector of `len` bits with ones exactly at `indices`.
    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = BitVector::zeros(len);
        for &i in indices {
            v.set(i, true);
        }
        v
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(text: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(BitVector::from_bits(bits))
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when the vector has no bits at all.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The bit at `i`. Panics if out of range.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    /// Sets the bit at `i`. Panics if out of range.
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    /// Flips the bit at `i`.
    pub fn flip(&mut self, i: usize) {
        let mask = 1u64 << (i % WORD_BITS);
        self.words[i / WORD_BITS] ^= mask;
    }

    /// Number of set bits.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True when every bit is zero.
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place XOR with another vector of the same length.
    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Parity of the overlap (dot product) with another vector.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "dot length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Indices of the set bits, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    /// Iterator over all bits.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Concatenation of `self` followed by `other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in 0..self.len {
            out.set(i, self.get(i));
        }
        for i in 0..other.len {
            out.set(self.len + i, other.get(i));
        }
        out
    }

    /// The sub-vector made of the bits at `indices` (in the given order).
    pub fn select(&self, indices: &[usize]) -> BitVector {
        BitVector::from_bits(indices.iter().map(|&i| self.get(i)))
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A dense bit matrix with row-major packed storage.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    row_words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    /// The all-zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let row_words = cols.div_ceil(WORD_BITS);
        BitMatrix {
            rows,
            cols,
            row_words,
            data: vec![0; rows * row_words],
        }
    }

    /// The identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from row vectors, all of equal length.
    pub fn from_rows(rows: &[BitVector], cols: usize) -> Self {
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row {i} has wrong length");
            m.set_row(i, r);
        }
        m
    }

    /// Builds a matrix from a nested bit description (test convenience).
    pub fn from_bits(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b != 0);
            }
        }
        m
    }

    /// Row count.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Column count.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Shape as `(rows, cols)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// The entry at `(r, c)`.
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        self.data[r * self.row_words + c / WORD_BITS] >> (c % WORD_BITS) & 1 == 1
    }

    /// Sets the entry at `(r, c)`.
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let mask = 1u64 << (c % WORD_BITS);
        let w = &mut self.data[r * self.row_words + c / WORD_BITS];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Copies one row out as a vector.
    pub fn row(&self, r: usize) -> BitVector {
        assert!(r < self.rows);
        let mut v = BitVector::zeros(self.cols);
        v.words
            .copy_from_slice(&self.data[r * self.row_words..(r + 1) * self.row_words]);
        v
    }

    /// Overwrites one row from a vector of matching length.
    pub fn set_row(&mut self, r: usize, v: &BitVector) {
        assert!(r < self.rows && v.len() == self.cols);
        self.data[r * self.row_words..(r + 1) * self.row_words].copy_from_slice(&v.words);
    }

    /// Copies one column out as a vector.
    pub fn col(&self, c: usize) -> BitVector {
        BitVector::from_bits((0..self.rows).map(|r| self.get(r, c)))
    }

    /// XORs row `src` into row `dst`.
    pub fn xor_rows(&mut self, src: usize, dst: usize) {
        assert!(src < self.rows && dst < self.rows && src != dst);
        let (s, d) = (src * self.row_words, dst * self.row_words);
        for k in 0..self.row_words {
            let w = self.data[s + k];
            self.data[d + k] ^= w;
        }
    }

    /// Swaps two rows.
    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.row_words {
            self.data.swap(a * self.row_words + k, b * self.row_words + k);
        }
    }

    /// The transpose.
    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// True when all entries are zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Matrix product over GF(2).
    pub fn multiply(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::Shape {
                context: "multiply",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let base = r * self.row_words;
            for c in 0..self.cols {
                if self.data[base + c / WORD_BITS] >> (c % WORD_BITS) & 1 == 1 {
                    let src = c * other.row_words;
                    let dst = r * out.row_words;
                    for k in 0..other.row_words {
                        out.data[dst + k] ^= other.data[src + k];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix–vector product `M·x`.
    pub fn mul_vec(&self, x: &BitVector) -> Result<BitVector, Gf2Error> {
        if self.cols != x.len() {
            return Err(Gf2Error::Shape {
                context: "mul_vec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.row(r).dot(x) {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// Stacks `self` on top of `other` (equal widths).
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.cols {
            return Err(Gf2Error::Shape {
                context: "vstack",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut rows: Vec<BitVector> = (0..self.rows).map(|r| self.row(r)).collect();
        rows.extend((0..other.rows).map(|r| other.row(r)));
        Ok(BitMatrix::from_rows(&rows, self.cols))
    }

    /// Places `self` and `other` side by side (equal heights).
    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.rows != other.rows {
            return Err(Gf2Error::Shape {
                context: "hstack",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let rows: Vec<BitVector> = (0..self.rows)
            .map(|r| self.row(r).concat(&other.row(r)))
            .collect();
        Ok(BitMatrix::from_rows(&rows, self.cols + other.cols))
    }

    /// The submatrix keeping only the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> BitMatrix {
        let rows: Vec<BitVector> = (0..self.rows).map(|r| self.row(r).select(cols)).collect();
        BitMatrix::from_rows(&rows, cols.len())
    }

    /// The submatrix keeping only the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> BitMatrix {
        let sel: Vec<BitVector> = rows.iter().map(|&r| self.row(r)).collect();
        BitMatrix::from_rows(&sel, self.cols)
    }

    /// Reduced row-echelon form together with rank, pivot columns, and the
    /// invertible transform `t` with `t · self = reduced`.
    pub fn row_reduce(&self) -> RowReduction {
        let mut reduced = self.clone();
        let mut transform = BitMatrix::identity(self.rows);
        let mut pivots = Vec::new();
        let mut next_row = 0;
        for col in 0..self.cols {
            if next_row == self.rows {
                break;
            }
            // Deterministic pivoting: first nonzero column, first available row.
            let pivot = (next_row..self.rows).find(|&r| reduced.get(r, col));
            let Some(pivot) = pivot else { continue };
            reduced.swap_rows(pivot, next_row);
            transform.swap_rows(pivot, next_row);
            for r in 0..self.rows {
                if r != next_row && reduced.get(r, col) {
                    reduced.xor_rows(next_row, r);
                    transform.xor_rows(next_row, r);
                }
            }
            pivots.push(col);
            next_row += 1;
        }
        RowReduction {
            rank: pivots.len(),
            reduced,
            pivots,
            transform,
        }
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        self.row_reduce().rank
    }

    /// A basis of the kernel `{x : M·x = 0}` as matrix rows: the standard
    /// free-variable basis read from the reduced row-echelon form.
    pub fn kernel_basis(&self) -> BitMatrix {
        let rr = self.row_reduce();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (row, &col) in rr.pivots.iter().enumerate() {
                v[col] = Some(row);
            }
            v
        };
        let free: Vec<usize> = (0..self.cols).filter(|c| pivot_set[*c].is_none()).collect();
        let mut basis = BitMatrix::zeros(free.len(), self.cols);
        for (k, &f) in free.iter().enumerate() {
            basis.set(k, f, true);
            for (row, &col) in rr.pivots.iter().enumerate() {
                if rr.reduced.get(row, f) {
                    basis.set(k, col, true);
                }
            }
        }
        basis
    }

    /// Any solution `x` of `M·x = s`, or `None` when `s` is outside the
    /// column space.
    pub fn solve(&self, s: &BitVector) -> Result<Option<BitVector>, Gf2Error> {
        if s.len() != self.rows {
            return Err(Gf2Error::Shape {
                context: "solve",
                left: self.shape(),
                right: (s.len(), 1),
            });
        }
        let rr = self.row_reduce();
        let ts = rr.transform.mul_vec(s)?;
        // Rows past the rank are zero rows of the RREF; inconsistency shows
        // up there.
        if (rr.rank..self.rows).any(|r| ts.get(r)) {
            return Ok(None);
        }
        let mut x = BitVector::zeros(self.cols);
        for (row, &col) in rr.pivots.iter().enumerate() {
            if ts.get(row) {
                x.set(col, true);
            }
        }
        debug_assert_eq!(&self.mul_vec(&x)?, s);
        Ok(Some(x))
    }

    /// True when `v` lies in the rowspace of `self`.
    pub fn rowspace_contains(&self, v: &BitVector) -> bool {
        let stacked = self
            .vstack(&BitMatrix::from_rows(std::slice::from_ref(v), v.len()))
            .expect("width mismatch in rowspace_contains");
        stacked.rank() == self.rank()
    }

    /// A reduced basis of `rowspace(self) + rowspace(other)`.
    pub fn subspace_sum(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        let stacked = self.vstack(other)?;
        Ok(stacked.row_basis())
    }

    /// A basis of `rowspace(self) ∩ rowspace(other)` (Zassenhaus algorithm).
    pub fn subspace_intersection(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.cols {
            return Err(Gf2Error::Shape {
                context: "subspace_intersection",
                left: self.shape(),
                right: other.shape(),
            });
        }
        // Zassenhaus: row-reduce [A|A; B|0]; rows whose left half is zero
        // carry an intersection basis in their right half.
        let top = self.hstack(self)?;
        let bottom = other.hstack(&BitMatrix::zeros(other.rows, other.cols))?;
        let block = top.vstack(&bottom)?;
        let rr = block.row_reduce();
        let mut rows = Vec::new();
        for r in 0..block.rows() {
            let full = rr.reduced.row(r);
            if full.is_zero() {
                continue;
            }
            let left: Vec<usize> = (0..self.cols).collect();
            let right: Vec<usize> = (self.cols..2 * self.cols).collect();
            if full.select(&left).is_zero() {
                let v = full.select(&right);
                if !v.is_zero() {
                    rows.push(v);
                }
            }
        }
        Ok(BitMatrix::from_rows(&rows, self.cols))
    }

    /// The nonzero rows of the reduced row-echelon form: a canonical basis of
    /// the rowspace.
    pub fn row_basis(&self) -> BitMatrix {
        let rr = self.row_reduce();
        let keep: Vec<usize> = (0..rr.rank).collect();
        rr.reduced.select_rows(&keep)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}

/// Result of [`BitMatrix::row_reduce`].
#[derive(Clone, Debug)]
pub struct RowReduction {
    /// The matrix in reduced row-echelon form.
    pub reduced: BitMatrix,
    /// Number of pivots.
    pub rank: usize,
    /// Pivot column of each leading row, ascending.
    pub pivots: Vec<usize>,
    /// Invertible matrix with `transform · original = reduced`.
    pub transform: BitMatrix,
}

/// Iterates over all vectors of the rowspace of `basis` in Gray-code order,
/// calling `visit` with each nonzero combination exactly once.
///
/// The Gray-code walk flips one basis row per step, so each visited vector is
/// produced with a single row XOR. `visit` receives the current combination.
pub fn gray_walk_rowspace(basis: &BitMatrix, mut visit: impl FnMut(&BitVector)) {
    let k = basis.rows();
    assert!(k < usize::BITS as usize, "gray walk dimension too large");
    let mut current = BitVector::zeros(basis.cols());
    for step in 1u128..(1u128 << k) {
        let flip = step.trailing_zeros() as usize;
        current.xor_assign(&basis.row(flip));
        visit(&current);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_multiplication_is_neutral() {
        let m = BitMatrix::from_bits(&[&[1, 0, 1], &[0, 1, 1]]);
        let i = BitMatrix::identity(2);
        assert_eq!(i.multiply(&m).unwrap(), m);
    }

    #[test]
    fn involution_squares_to_identity() {
        let m = BitMatrix::from_bits(&[&[1, 1], &[0, 1]]);
        assert_eq!(m.multiply(&m).unwrap(), BitMatrix::identity(2));
    }

    #[test]
    fn kernel_of_chain_matrix() {
        let m = BitMatrix::from_bits(&[&[1, 1, 0], &[0, 1, 1]]);
        let k = m.kernel_basis();
        assert_eq!(k.rows(), 1);
        assert_eq!(k.row(0), BitVector::parse("111").unwrap());
    }
}
