//! Optimal Halpern fixed-point iterations for Lipschitz maps in normed spaces.
//!
//! The iteration `x^n = (1 - beta_n) x^0 + beta_n T x^{n-1}` averages every step
//! with the fixed anchor `x^0`. For a rho-Lipschitz map `T` this crate provides:
//!
//! - [`schedules`]: the minimax-optimal schedule and bound recursions, the
//!   flat (distance-based) variant, and bound recursions for arbitrary
//!   user-supplied beta sequences;
//! - [`operators`]: concrete test maps (rotation contraction, cyclic shift,
//!   Goebel's map, the scaled right-shift on l1, general affine maps);
//! - [`engine`]: deterministic Halpern / Banach-Picard / adaptive / Mann runs
//!   with per-step traces and online bound checking;
//! - [`transport`]: nested optimal-transport bounds for general Mann arrays,
//!   dual potentials, and the adversarial instance certifying that the bounds
//!   are attained;
//! - [`affine`]: the residual bound `L_n(beta)` for affine maps, its minimizer,
//!   and Lambert-W closed forms for the optimal horizon;
//! - [`analysis`]: transition indices, speedup ratios against the geometric
//!   baseline, and the logistic-map error envelopes.
//!
//! All arithmetic is binary64; schedules and traces are computed eagerly so
//! CSV emission is reproducible byte for byte.

// index-coupled recursions read better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod affine;
pub mod analysis;
pub mod config;
pub mod engine;
pub mod error;
pub mod figures;
pub mod operators;
pub mod rng;
pub mod schedules;
pub mod svg;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use schedules::Rho;
