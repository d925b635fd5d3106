//! Greedy policy wrapper around a trained network.

use rand_chacha::ChaCha8Rng;

use super::net::{forward_single, NetworkParams, RecurrentState};
use crate::env::{Action, Policy};

/// Stateful per-trajectory policy: resets the recurrent state, consumes
/// `(o_t, a_{t-1})` each step, and returns the Q-minimizing action.
/// Deterministic given the parameters.
///
/// Monte Carlo evaluation at scale uses the batched
/// [`super::evaluate_greedy`] instead; this wrapper exists for the
/// trajectory-level tooling (belief tracking, point clouds).
pub struct RqnPolicy {
    params: NetworkParams,
    state: RecurrentState,
    prev_action: Action,
    next_t: usize,
}

impl RqnPolicy {
    pub fn new(params: NetworkParams) -> Self {
        let hidden = params.shape.hidden;
        RqnPolicy {
            params,
            state: RecurrentState::zeros(1, hidden),
            prev_action: Action::DoNothing,
            next_t: 1,
        }
    }
}

impl Policy for RqnPolicy {
    fn reset(&mut self) {
        self.state = RecurrentState::zeros(1, self.params.shape.hidden);
        self.prev_action = Action::DoNothing;
        self.next_t = 1;
    }

    fn act(&mut self, t: usize, obs: f64, _rng: &mut ChaCha8Rng) -> Action {
        assert_eq!(t, self.next_t, "policy queried out of timeline order");
        let (q, _, _, state) = forward_single(&self.params, obs, self.prev_action, &self.state);
        self.state = state;
        let mut best = Action::DoNothing;
        let mut best_q = f64::INFINITY;
        for a in Action::ALL {
            if q[a.index()] < best_q {
                best_q = q[a.index()];
                best = a;
            }
        }
        self.prev_action = best;
        self.next_t += 1;
        best
    }
}
