//! Exact desk-scale machinery for largest `H`-free subgraphs of random graphs.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! the experiment harness live in the `simonovits` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bitset;
pub mod bounds;
pub mod error;
pub mod extremal;
pub mod graph;
pub mod hypergraph;
pub mod iso;
pub mod pattern;
pub mod random;
pub mod rational;
pub mod rigidity;
pub mod structure;

pub use bitset::BitSet;
pub use error::{Error, Result};
pub use graph::{ColoredGraph, Graph, PartTuple};
pub use hypergraph::CopyHypergraph;
pub use pattern::PatternProfile;
pub use rational::Rational;
