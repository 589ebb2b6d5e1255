//! Exact and randomized tools for spread set families, homogeneous
//! approximation and intersecting families of sets and permutations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod family;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod approx;
pub mod cli;
pub mod clique;
pub mod oracle;
pub mod probabilistic;
pub mod perm;

pub use error::{Error, Result};
pub use family::{GroundSet, SetFamily};
pub use mask::SubsetMask;
pub use perm::{PartialPermutation, Permutation, PermutationFamily};
