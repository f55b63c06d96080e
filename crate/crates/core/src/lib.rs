//! Solver, certifier and simulator for repeated cheap-talk games.
//!
//! The crate is organized bottom-up:
//!
//! * [`optim`]: dense simplex, bisection, adaptive quadrature.
//! * [`model`]: finite Sender-Receiver stage games, behavioral strategies,
//!   payoffs, best responses, minmax values and the feasible payoff set.
//! * [`wrp`]: punishment construction and certificates for weakly
//!   renegotiation-proof targets, frontier scans and the gap below the
//!   Receiver optimum.
//! * [`binary`]: closed forms for the two-state persuasion game.
//! * [`continuum`]: the uniform-quadratic style continuum game and its
//!   discretization.
//! * [`repeated`]: three-phase automata, incentive checks and simulation.
//!
//! Grid loops go through [`Exec`], which runs on rayon when the `parallel`
//! feature is enabled and sequentially otherwise.

pub mod binary;
pub mod continuum;
pub mod error;
pub mod exec;
pub mod format;
pub mod model;
pub mod optim;
pub mod repeated;
pub mod wrp;

pub use error::{Error, Result};
pub use exec::Exec;
pub use model::{FiniteCheapTalkGame, PayoffProfile, ReceiverStrategy, SenderStrategy};
