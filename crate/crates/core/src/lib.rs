//! Nonparametric, rank-based estimation of the rooted tree structure of a
//! nested Archimedean copula.
//!
//! The pipeline tests every triple of variables for its trivariate structure
//! with a bootstrap on empirical Kendall distributions ([`triad`]), then
//! assembles the global tree from the trivariate decisions ([`reconstruct`]).
//! Frailty samplers ([`sampler`]) and a simulation harness ([`simlab`]) are
//! provided to validate the whole thing end to end.

pub mod data;
pub mod error;
pub mod generator;
pub mod kendall;
mod quad;
pub mod reconstruct;
pub mod rng;
pub mod sampler;
pub mod simlab;
pub mod tree;
pub mod triad;

pub use error::{Error, Result};
pub use generator::{Family, Generator};
pub use tree::{LeafSet, TreeStructure, TripleKey, TripleShape};
