//! Spin-½ damped harmonic oscillator coupled to an Ohmic bath.
//!
//! The main coordinate splits into two Gaussian branches, one per spin
//! eigenvalue, that settle into the wells at `±d` while the bath adds a
//! Brownian width. Everything here is closed form, backed by independent
//! numerical oracles in [`verify`].
//!
//! Module map:
//! - [`kernel`]: homogeneous-solution coefficients `a1, a2` and derived constants.
//! - [`bath`]: Ohmic bath discretization, bath response coefficients and Brownian widths.
//! - [`wavepacket`]: packet widths, Born weights and density grids.
//! - [`verify`]: ODE, quadrature, PDE-residual and eigenbasis oracles.
//! - [`bell`]: singlet correlations and the three-setting Bell inequality.

pub mod bath;
pub mod bell;
mod error;
pub mod kernel;
pub mod numerics;
pub mod verify;
pub mod wavepacket;

pub use error::{Error, Result};
pub use kernel::{CoeffPair, ModelParams, Regime};
