//! Numerical solver for sweeping processes `-y' in N_{C(t)}(y)` driven by uniformly
//! prox-regular moving sets with bounded retraction.
//!
//! The pipeline: a [`movingset::MovingSet`] is measured by its retraction arc length
//! ([`movingset::RetractionProfile`]), reparametrized into a family that is 1-Lipschitz
//! in excess with jumps filled by excess geodesics ([`movingset::NormalizedMovingSet`]),
//! solved by the catching-up scheme on dyadic grids ([`solver::solve_lipschitz`]), and
//! composed back with the arc length ([`solver::solve_bv`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geodesic;
pub mod geometry;
pub mod movingset;
pub mod oracles;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{Point, SetDescriptor};
