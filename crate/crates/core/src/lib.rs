//! Powers of tight Hamilton cycles in randomly perturbed hypergraphs.
//!
//! The crate covers the finite objects behind the problem (k-graphs, power
//! paths and cycles), the second-moment calculators, binomial random
//! hypergraphs, dense host families, subgraph counting, an executable
//! absorbing pipeline, an exact backtracking oracle and an experiment harness.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod absorbing;
pub mod combin;
pub mod counting;
pub mod error;
pub mod exact;
pub mod harness;
pub mod hosts;
pub mod hypergraph;
pub mod power;
pub mod prob;
pub mod random;

pub use error::{Error, Result};
pub use hypergraph::KGraph;
pub use power::{Parameters, PowerPathInstance};
