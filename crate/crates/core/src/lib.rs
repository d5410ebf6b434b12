//! Exact computations around analytic rank and partition rank of tensors over
//! small finite fields: bias, partition-rank search with certificates, Gowers
//! norms of polynomial phases, and the subspace/sumset constructions that
//! relate the two ranks.
//!
//! Everything is exhaustive and exact at desk scale. Enumerations are guarded
//! (see [`guard`]) and every expectation is kept as an integer histogram until
//! a report needs a number.

pub mod additive;
pub mod error;
pub mod field;
pub mod guard;
pub mod linalg;
pub mod points;
pub mod poly;
pub mod rank;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use field::{FieldElem, FieldSpec};
pub use tensor::{IndexSplit, Tensor};
