//! The recurrent dueling Q-network and its training loop.
//!
//! The network never sees a belief. Its inputs at timestep `t` are the raw
//! observation `o_t` and the one-hot encoded previous action `a_{t-1}`;
//! its outputs are Q-value estimates for the four actions. Two small
//! fully-connected stacks extract features from each input, an LSTM core
//! embeds the observation-action history (a learned stand-in for the
//! belief), and a dueling head splits the estimate into a scalar value
//! and mean-centered per-action advantages:
//!
//! ```text
//! q_a = v + (adv_a - mean_a' adv_a')
//! ```
//!
//! Training is off-policy Q-learning over whole life cycles: an
//! epsilon-greedy behavior policy collects a fresh batch of trajectories
//! each epoch, Bellman targets come from a periodically cloned target
//! network, the squared errors are accumulated over the life cycle, and
//! the gradient flows through the full unrolled recurrence
//! (backpropagation through time). Updates use Adam with the AMSGRAD
//! correction; everything is double precision and hand-written, which is
//! what makes the finite-difference gradient checks in the test suite
//! meaningful.

mod adam;
mod net;
mod policy;
mod train;

pub use adam::AdamState;
pub use net::{
    forward, forward_single, lstm_param_count, Dense, LstmLayer, NetworkParams, NetworkShape,
    RecurrentState, StepOutput,
};
pub use policy::RqnPolicy;
pub use train::{
    collect_batch, evaluate_greedy, grid_search, lcc_mse_loss, load_checkpoint, loss_and_grads,
    save_checkpoint, train, training_log_csv, BatchTrajectories, EpochLog, GreedyEval,
    GridSearchOutcome, GridSearchSpace, LeaderboardEntry, TrainConfig, TrainOutcome, Trainer,
};
