//! Solver, verifier and simulator for a two-player zero-sum switching game
//! on a geometric Brownian motion.
//!
//! Player I (the maximizer) picks a regime `i`, player II (the minimizer) a
//! regime `j`. While the joint regime is `(i, j)` the state follows
//! `dX = b_ij X dt + σ_ij X dW` and pays `X^γ` to player I. Switching costs
//! `c_ik` are paid by player I, `χ_jl` are paid by player II to player I.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! The `parallel` feature runs Monte Carlo paths on a rayon pool; results are
//! identical to the serial path.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classify;
pub mod closedform;
pub mod hitting;
mod math;
pub mod model;
pub mod montecarlo;
pub mod piecewise;
pub mod qvi;
pub mod roots;
pub mod sample;

pub use classify::{classify, Cell, ClassifyError, CostCondition, OrderCase};
pub use closedform::{build, solve, BuildError, Player, Region, Regions, Solution, Thresholds};
pub use model::{GameSpec, Regime, RegimeDerived, ValidationReport, Violation};
pub use piecewise::{Piece, PiecewiseValue};
