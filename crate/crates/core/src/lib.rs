//! Graded modal μ-calculus toolkit: exact and approximate semantics, the
//! counting algorithm as a transition system, and a compiler from sentences
//! to simple halting recurrent GNNs.

pub mod bisim;
pub mod cli;
pub mod counting;
pub mod formula;
pub mod gen;
pub mod gnn;
pub mod graph;
pub mod semantics;
