//! Solvers for linear-quadratic network games whose peer effects pass through a
//! concave interaction function.
//!
//! The crate covers four areas:
//!
//! - [`game`]: game instances, assumption checks, normalization and the Nash
//!   equilibrium fixed-point solver.
//! - [`pricing`]: the monopolist's revenue-maximizing prices, computed through the
//!   single-level objective `J(x) = xᵀ(a + G f(x) − Bx)`, the network-agnostic
//!   baseline and lower bounds on the price of information.
//! - [`graphs`]: star, ring and preferential-attachment generators with the
//!   directional mixing transform.
//! - [`experiments`]: parameter sweeps, CSV/SVG emission and a brute-force
//!   oracle for small instances.

// `!(v > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod game;
pub mod graphs;
pub mod interaction;
pub mod linalg;
pub mod pricing;

pub use error::{Error, Result};
pub use game::{AssumptionReport, GameSpec, NeOptions, SolveReport};
pub use interaction::{CustomInteraction, InteractionFunction, InteractionKind};
pub use pricing::{PgOptions, PoiReport, PricingSolution};
