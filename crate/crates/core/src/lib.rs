//! Assortative configuration graphs: directed random multigraphs whose node
//! degrees and edge-endpoint degrees follow prescribed joint laws.
//!
//! A model is a pair `(P, Q)`: `P_jk` is the probability that a node has
//! in-degree `j` and out-degree `k`, and `Q_kj` is the probability that an edge
//! runs from a node of out-degree `k` to a node of in-degree `j`.
//!
//! - [`degree_model`]: parameter validation, marginals, consistency.
//! - [`sampler`]: approximate simulation of graphs.
//! - [`exact_kernel`]: exact small-`E` wiring combinatorics.
//! - [`asymptotics`]: critical points and the Laplace approximation.
//! - [`config_probability`]: limiting configuration probabilities and counting.
//! - [`stats_validation`]: Monte Carlo suites.

#![allow(clippy::needless_range_loop)]

pub mod asymptotics;
pub mod config_probability;
pub mod degree_model;
pub mod exact_kernel;
pub mod fixtures;
pub mod sampler;
pub mod stats_validation;

pub use degree_model::{
    DegreeModel, DegreeSupport, EdgeType, EdgeTypeDist, ModelError, NodeType, NodeTypeDist,
};
pub use exact_kernel::{EdgeTypeMatrix, EnumerationCaps, ExactError, Margins};
pub use sampler::{Edge, GenerateOptions, MultiGraph, SamplerError};
