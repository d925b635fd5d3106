//! Ground-truth deterioration dynamics, action effects, observations, and
//! cost accounting over one life cycle.
//!
//! The component state is a pair `(d, k)`: deterioration level `d` and
//! deterioration rate `k`. Left alone the level drifts by the rate each
//! year,
//!
//! ```text
//! d_t = d_{t-1} + k_{t-1},    k_t = k_{t-1},
//! ```
//!
//! with normally distributed and independent initial values. The level is
//! measured through Gaussian noise, `o_t ~ Normal(d_t, sigma_e)`. The
//! system counts as failed while `d > d_cr`, incurring an annual failure
//! cost until repaired or replaced. There is no clamping: a negative rate
//! regenerates the system.
//!
//! The per-timestep order of events is fixed and shared by every solver:
//! at `t = 0` the initial state is drawn, a potential failure cost is
//! charged, and the forced action `a0` is applied; at `t = 1..t_end-1` the
//! failure cost is charged on the pre-action state, an observation is
//! drawn, the policy picks an action whose cost is charged at `t`, and the
//! state advances; at `t = t_end` only the final failure check remains.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Model and cost parameters for the one-component system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Mean of the initial deterioration level `D_0`.
    pub mu_d0: f64,
    /// Mean of the initial deterioration rate `K_0`.
    pub mu_k0: f64,
    /// Standard deviation of `D_0`.
    pub sigma_d0: f64,
    /// Standard deviation of `K_0`.
    pub sigma_k0: f64,
    /// Level improvement of the repair action `a2`.
    pub delta_d: f64,
    /// Rate reduction of the slow-down action `a1`.
    pub delta_k: f64,
    /// Cost of each action, indexed `a0..a3`.
    pub cost_action: [f64; 4],
    /// Annual cost while the system is failed.
    pub cost_failure: f64,
    /// Discount factor per year.
    pub gamma: f64,
    /// Failure threshold: the system is failed while `d > d_cr`.
    pub d_cr: f64,
    /// Final timestep of the life cycle (decisions run `1..t_end-1`).
    pub t_end: usize,
    /// Observation noise standard deviation.
    pub sigma_e: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            mu_d0: -132.64,
            mu_k0: 6.4,
            sigma_d0: 20.85,
            sigma_k0: 1.0,
            delta_d: 10.5,
            delta_k: 0.2,
            cost_action: [0.0, 1.0, 5.0, 100.0],
            cost_failure: 150.0,
            gamma: 1.0 / 1.02,
            d_cr: 0.0,
            t_end: 20,
            sigma_e: 0.5,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_d0 > 0.0) || !(self.sigma_k0 > 0.0) {
            return Err(Error::Config("initial standard deviations must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config("gamma must lie in (0, 1]".into()));
        }
        if self.t_end < 2 {
            return Err(Error::Config("t_end must be at least 2".into()));
        }
        if self.sigma_e < 0.0 {
            return Err(Error::Config("sigma_e must be nonnegative".into()));
        }
        if self.cost_action.iter().any(|c| *c < 0.0) || self.cost_failure < 0.0 {
            return Err(Error::Config("costs must be nonnegative".into()));
        }
        Ok(())
    }

    /// Convenience: same parameters with a different observation noise.
    pub fn with_sigma_e(mut self, sigma_e: f64) -> Self {
        self.sigma_e = sigma_e;
        self
    }
}

/// True (hidden) system state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    /// Deterioration level.
    pub d: f64,
    /// Deterioration rate.
    pub k: f64,
}

/// Maintenance actions, in cost order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    /// `a0`: do nothing.
    DoNothing = 0,
    /// `a1`: reduce the deterioration rate by `delta_k`.
    ReduceRate = 1,
    /// `a2`: improve the deterioration level by `delta_d`.
    ImproveState = 2,
    /// `a3`: replace the component with a fresh one.
    Replace = 3,
}

impl Action {
    pub const ALL: [Action; 4] = [
        Action::DoNothing,
        Action::ReduceRate,
        Action::ImproveState,
        Action::Replace,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Action> {
        Action::ALL.get(idx).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Action::DoNothing => "a0",
            Action::ReduceRate => "a1",
            Action::ImproveState => "a2",
            Action::Replace => "a3",
        }
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Draw the initial state: `d ~ Normal(mu_d0, sigma_d0)` and
/// `k ~ Normal(mu_k0, sigma_k0)`, independent.
pub fn sample_initial<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> SystemState {
    let zd: f64 = rng.sample(StandardNormal);
    let zk: f64 = rng.sample(StandardNormal);
    SystemState {
        d: params.mu_d0 + params.sigma_d0 * zd,
        k: params.mu_k0 + params.sigma_k0 * zk,
    }
}

/// Advance the true state by one timestep under `action`.
///
/// Replacement draws a fresh component: new `D_0`, `K_0` samples, already
/// advanced one step (`d = D_0 + K_0`, `k = K_0`).
pub fn transition<R: Rng + ?Sized>(
    state: SystemState,
    action: Action,
    params: &ModelParams,
    rng: &mut R,
) -> SystemState {
    match action {
        Action::DoNothing => SystemState { d: state.d + state.k, k: state.k },
        Action::ReduceRate => SystemState {
            d: state.d + state.k - params.delta_k,
            k: state.k - params.delta_k,
        },
        Action::ImproveState => SystemState { d: state.d + state.k - params.delta_d, k: state.k },
        Action::Replace => {
            let fresh = sample_initial(params, rng);
            SystemState { d: fresh.d + fresh.k, k: fresh.k }
        }
    }
}

/// Noisy measurement of the deterioration level.
///
/// A standard normal is always consumed from `rng`, even for
/// `sigma_e = 0`, so the draw sequence (and hence everything downstream of
/// a seeded run) does not depend on the noise level.
pub fn observe<R: Rng + ?Sized>(state: &SystemState, params: &ModelParams, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    state.d + params.sigma_e * z
}

/// Immediate cost of taking `action` at the current timestep: the action
/// cost plus the annual failure cost if the pre-action state is failed.
pub fn step_cost(state: &SystemState, action: Action, params: &ModelParams) -> f64 {
    params.cost_action[action.index()] + failure_cost(state, params)
}

/// Failure cost charged on a state (`cost_f` while `d > d_cr`).
pub fn failure_cost(state: &SystemState, params: &ModelParams) -> f64 {
    if state.d > params.d_cr {
        params.cost_failure
    } else {
        0.0
    }
}

/// A decision rule queried once per timestep `t = 1..t_end-1`.
///
/// Policies are stateful per trajectory: belief-tracking policies advance
/// their filter inside [`Policy::act`] (they know the action they returned
/// last), and the recurrent network carries its hidden state the same way.
/// [`Policy::reset`] is called at the start of every trajectory.
pub trait Policy {
    fn reset(&mut self);

    /// Choose the action for timestep `t` given the observation `o_t`.
    fn act(&mut self, t: usize, obs: f64, rng: &mut ChaCha8Rng) -> Action;
}

/// One simulated life cycle.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Observations `o_1..o_{t_end-1}`; index with [`Trajectory::observation`].
    pub observations: Vec<f64>,
    /// Actions `a_0..a_{t_end-1}`; `a_0` is always the forced `a0`.
    pub actions: Vec<Action>,
    /// Per-timestep cost totals `c_0..c_{t_end}` (failure plus action).
    pub costs: Vec<f64>,
    /// Ground-truth states `s_0..s_{t_end}` (pre-action at each `t`).
    pub states: Vec<SystemState>,
    /// Discounted life cycle cost `sum_t gamma^t c_t`.
    pub discounted_lcc: f64,
}

impl Trajectory {
    /// Observation at timestep `t` (valid for `1 <= t <= t_end-1`).
    pub fn observation(&self, t: usize) -> f64 {
        self.observations[t - 1]
    }

    /// Recompute the discounted LCC from the per-step costs.
    pub fn recompute_lcc(&self, gamma: f64) -> f64 {
        discounted_sum(&self.costs, gamma)
    }
}

pub(crate) fn discounted_sum(costs: &[f64], gamma: f64) -> f64 {
    let mut disc = 1.0;
    let mut total = 0.0;
    for c in costs {
        total += disc * c;
        disc *= gamma;
    }
    total
}

/// Simulate one full life cycle under `policy`.
///
/// Timeline: `t = 0` draws the initial state, charges a potential failure
/// cost, and applies the forced `a0`; each `t in 1..t_end-1` charges the
/// failure cost on the pre-action state, draws `o_t`, asks the policy,
/// charges the action cost, and advances the state; `t_end` charges the
/// final failure cost.
pub fn simulate_trajectory<P: Policy + ?Sized>(
    policy: &mut P,
    params: &ModelParams,
    rng: &mut ChaCha8Rng,
) -> Trajectory {
    policy.reset();

    let t_end = params.t_end;
    let mut observations = Vec::with_capacity(t_end - 1);
    let mut actions = Vec::with_capacity(t_end);
    let mut costs = Vec::with_capacity(t_end + 1);
    let mut states = Vec::with_capacity(t_end + 1);

    let mut state = sample_initial(params, rng);
    states.push(state);
    costs.push(failure_cost(&state, params));
    actions.push(Action::DoNothing);
    state = transition(state, Action::DoNothing, params, rng);

    for t in 1..t_end {
        states.push(state);
        let mut cost = failure_cost(&state, params);
        let obs = observe(&state, params, rng);
        observations.push(obs);
        let action = policy.act(t, obs, rng);
        cost += params.cost_action[action.index()];
        actions.push(action);
        costs.push(cost);
        state = transition(state, action, params, rng);
    }

    states.push(state);
    costs.push(failure_cost(&state, params));

    let discounted_lcc = discounted_sum(&costs, params.gamma);
    Trajectory { observations, actions, costs, states, discounted_lcc }
}
