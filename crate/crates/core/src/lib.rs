//! Exact wall-crossing engine for the auxiliary category of triples `(F, V, φ)`.
//!
//! Computes the transformation coefficients between the weak stability conditions `τ•` and
//! `τ̃`, assembles `ε̄^(β,d)(τ̃)` in a formal Hall algebra, reduces `ε̄^(0,2)(τ•)` in a small
//! stack-function calculus, and evaluates rank-1 and rank-2 pair invariants from
//! user-supplied generalized DT values and Euler pairings. Everything is exact.

pub mod classes;
pub mod cli;
pub mod coefficients;
pub mod error;
pub mod hall;
pub mod invariants;
pub mod lie;
pub mod rational;
pub mod stackcalc;
pub mod verify;

pub use classes::{ChernClass, Lattice, NumClass, StabCondition};
pub use error::{Error, Result};
pub use rational::Rational;
