//! Life-cycle maintenance planning for a one-component deteriorating system.
//!
//! A component deteriorates linearly with an uncertain rate, is inspected
//! through a noisy sensor, and can be maintained with four actions of
//! increasing cost (do nothing, slow the deterioration, improve the state,
//! replace). The planning problem is a finite-horizon POMDP: minimize the
//! discounted life cycle cost (LCC), the sum of action costs and annual
//! failure costs.
//!
//! Because the dynamics are linear-Gaussian, the belief over the hidden
//! state stays bivariate normal and can be propagated in closed form
//! ([`belief`]). That makes three very different solvers comparable on the
//! same problem:
//!
//! * [`vi`] — backward-induction value iteration on a discretized belief
//!   grid; the quasi-optimal reference solution.
//! * [`mcts`] — online UCT tree search over bucketed observations, with
//!   root states sampled from the analytic belief.
//! * [`rqn`] — a recurrent dueling Q-network trained directly on raw
//!   observation–action histories, with no belief computation at all.
//!
//! [`harness`] evaluates and compares the resulting policies by Monte
//! Carlo simulation and exports everything as CSV/JSON for plotting.
//!
//! The `imaint` CLI (see the companion crate) wraps the harness in
//! subcommands; the mdbook under `book/` walks through the model and each
//! solver with runnable snippets.

pub mod belief;
mod book;
pub mod config;
pub mod env;
pub mod harness;
pub mod mcts;
pub mod rqn;
pub mod vi;

mod gauss;

pub use env::{Action, ModelParams, Policy, SystemState, Trajectory};

use thiserror::Error;

/// Library-wide error type. The CLI maps [`Error::Config`] to exit code 2
/// and [`Error::Divergence`] to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad value, missing file, missing artifact.
    #[error("config error: {0}")]
    Config(String),

    /// Training produced non-finite costs and cannot continue.
    #[error("divergence: {0}")]
    Divergence(String),

    /// Underlying I/O failure while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
