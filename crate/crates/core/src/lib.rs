//! Stochastic switching circuits over exact rational probabilities.
//!
//! A pswitch is a two-terminal switch that is closed independently with a
//! fixed probability. This crate evaluates series-parallel and general
//! pswitch networks, synthesizes simple series-parallel (ssp) circuits that
//! realize `a/q^n` exactly over the uniform set `{1/q, ..., (q-1)/q}`,
//! approximates arbitrary targets over arbitrary pswitch sets with a greedy
//! backward search, and computes perturbation and approximation error
//! bounds.
//!
//! Every probability is a [`Rational`]; floating point only appears when
//! rendering reports.

pub mod approximation;
pub mod circuit;
mod error;
pub mod format;
pub mod general;
pub mod oracle;
pub mod pswitch;
pub mod rational;
pub mod robustness;
pub mod synthesis;

pub use circuit::{Orientation, SpCircuit, View};
pub use error::{Error, Result};
pub use general::{EdgeId, GeneralCircuit, SwitchState};
pub use pswitch::PswitchSet;
pub use rational::Rational;
