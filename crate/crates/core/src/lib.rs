//! Approximation of finite metric spaces by weighted trees.
//!
//! The crate is `no_std` (it needs `alloc`) and purely computational; file
//! formats, reports and the command-line tool live in the `nagatree` crate.
//!
//! * [`metric`]: validation, ultrametric and four-point checks, chain
//!   components and the exact Nagata constant.
//! * [`tree`]: weighted spanning trees, their path metrics and exact
//!   distortion reports.
//! * [`nagata`]: the dyadic chain-hierarchy tree, with distortion at most
//!   `8 c (1 - 2^-l)` for a space of Nagata constant `c`.
//! * [`rtree`] and [`gupta`]: geometric tree realization of 0-hyperbolic
//!   spaces and the sphere-halving tree with distortion below 8.
//! * [`search`]: exhaustive, branch-and-bound and local search for the
//!   minimum-distortion spanning tree.
//! * [`extend`]: Lipschitz extension into Euclidean space through a tree
//!   scaffold.
//! * [`fixtures`]: named spaces and seeded random families.
//!
//! All lengths are exact rationals ([`Rational`]); only the values of the
//! extended maps are floating point.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod extend;
pub mod fixtures;
pub mod gupta;
pub mod metric;
pub mod nagata;
pub mod rational;
pub mod rtree;
pub mod scaled;
pub mod search;
pub mod tree;
pub mod union_find;

pub use error::{Error, Result};
pub use metric::{
    chain_components, is_ultrametric, is_zero_hyperbolic, nagata_constant, nagata_constant_value,
    validate_metric, MetricSpace, NagataReport, Partition,
};
pub use rational::{parse_rational, Rational};
pub use tree::{canonical_weights, distortion, tree_metric, DistortionReport, WeightedTree};
