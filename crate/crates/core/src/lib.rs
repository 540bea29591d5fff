//! Edge embeddings on typed multi-graphs, for link prediction and friend
//! recommendation.
//!
//! A social graph with several edge types (contact, friend, chat) is split
//! into one subgraph per type. Each subgraph gets its own random-walk corpus
//! and skip-gram embedding table. A candidate pair is described by one edge
//! vector per type, and a fusion model (logistic regression or a multi-tower
//! network) turns those vectors into a link probability. A serving layer
//! retrieves candidates by nearest-neighbor search, re-ranks them with the
//! model and uses per-user bloom filters so nothing is shown twice.
//!
//! Modules, in pipeline order:
//!
//! - [`graph`]: typed undirected multi-graph with per-type CSR adjacency.
//! - [`walks`]: uniform, node2vec, per-edge and per-type random walks.
//! - [`sgns`]: skip-gram with negative sampling.
//! - [`edgeops`]: average / hadamard / concatenate edge vectors.
//! - [`fusion`]: logistic regression and the multi-tower network.
//! - [`eval`]: temporal split, AUC, precision@k.
//! - [`serving`]: nearest-neighbor index, bloom filters, recommender.
//! - [`pipeline`] and [`config`]: the stages behind the `hetedge` binary.
//! - [`synthetic`]: the planted benchmark graph.

pub mod config;
pub mod edgeops;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod graph;
pub mod math;
pub mod pipeline;
pub mod rng;
pub mod serving;
pub mod sgns;
pub mod synthetic;
pub mod walks;

pub use error::{Error, Result};
