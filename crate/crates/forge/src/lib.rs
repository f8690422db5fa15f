//! Chain-complex toolkit for Clifford circuits, stabilizer codes, and
//! measurement-based (MBQC) compilation.
//!
//! The crate models error-correcting codes and Clifford circuits as length-2
//! chain complexes over GF(2), certifies fault-tolerance-preserving
//! reductions between them, and compiles circuits into equivalent
//! measurement-based protocols together with their decoding problems.

pub mod gf2;

pub mod complex;

pub mod pauli;

pub mod chainmap;

pub mod circuit;

pub mod mbqc;

pub mod compile;

pub mod foliate;
