//! Online UCT tree search over bucketed observations.
//!
//! One tree is built per decision epoch. Every iteration samples a root
//! state from the analytic belief, descends the tree picking actions by
//! the UCT rule
//!
//! ```text
//! argmin_a  Q(h,a) - c * sqrt(ln N(h) / N(h,a))
//! ```
//!
//! (costs are minimized, so the exploration bonus is subtracted), steps
//! the true dynamics, and follows the child keyed by the taken action and
//! the observation's bucket. The first missing child is expanded, a
//! uniform-random rollout estimates its value, and the discounted return
//! is backpropagated as an incremental mean into every node on the path.
//!
//! Observations are continuous, so they are discretized into `n_buckets`
//! intervals: everything below the floor `d_fl` falls into bucket 0,
//! everything at or above the ceiling `d_ce` into the last bucket, and the
//! interior splits evenly.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::belief::{sample_state, BeliefFilter, BeliefMean, CovarianceSchedule};
use crate::env::{self, Action, ModelParams, Policy};
use crate::{Error, Result};

/// Tree-search parameters.
///
/// `n_tree`, `n_rollout`, and `n_buckets` default to a reasonable starting
/// point for the tuning recipe (time-budgeted sweep of iterations/rollouts,
/// then buckets per noise level); they are not themselves tuned values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MctsParams {
    /// Exploration constant `c >= 0`.
    pub c: f64,
    /// Tree iterations per decision.
    pub n_tree: usize,
    /// Rollout runs averaged per expansion.
    pub n_rollout: usize,
    /// Observation buckets (>= 3: floor, interior, ceiling).
    pub n_buckets: usize,
    /// Observation floor bound.
    pub d_fl: f64,
    /// Observation ceiling bound.
    pub d_ce: f64,
    /// Keep the subtree reached by (action, observation) across epochs
    /// instead of planning from scratch.
    pub reuse_tree: bool,
}

impl Default for MctsParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            n_tree: 10_000,
            n_rollout: 10,
            n_buckets: 20,
            d_fl: -159.36,
            d_ce: 26.67,
            reuse_tree: false,
        }
    }
}

impl MctsParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_buckets < 3 {
            return Err(Error::Config("n_buckets must be at least 3".into()));
        }
        if self.d_fl >= self.d_ce {
            return Err(Error::Config("d_fl must lie below d_ce".into()));
        }
        if self.c < 0.0 {
            return Err(Error::Config("exploration constant must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Observation bucket index for `o`.
pub fn bucketize(o: f64, params: &MctsParams) -> usize {
    let nb = params.n_buckets;
    if o < params.d_fl {
        return 0;
    }
    if o >= params.d_ce {
        return nb - 1;
    }
    let width = (params.d_ce - params.d_fl) / (nb - 2) as f64;
    (1 + ((o - params.d_fl) / width) as usize).min(nb - 2)
}

/// One history node: visit counts, running Q means, and children keyed by
/// (action, observation bucket).
#[derive(Debug, Clone)]
pub struct Node {
    pub visits: u32,
    pub action_visits: [u32; 4],
    pub q: [f64; 4],
    children: Vec<(u32, u32)>,
}

impl Node {
    fn new() -> Self {
        Node { visits: 0, action_visits: [0; 4], q: [0.0; 4], children: Vec::new() }
    }

    fn child(&self, key: u32) -> Option<u32> {
        self.children.iter().find(|(k, _)| *k == key).map(|(_, idx)| *idx)
    }
}

fn child_key(action: Action, bucket: usize) -> u32 {
    ((action.index() as u32) << 16) | bucket as u32
}

/// Select an action by UCT. Unvisited actions come first (uniformly at
/// random among them); among visited actions ties break toward the lower
/// index.
pub fn uct_select<R: Rng + ?Sized>(node: &Node, c: f64, rng: &mut R) -> Action {
    let unvisited: u32 = node.action_visits.iter().filter(|&&n| n == 0).count() as u32;
    if unvisited > 0 {
        let mut pick = rng.random_range(0..unvisited);
        for action in Action::ALL {
            if node.action_visits[action.index()] == 0 {
                if pick == 0 {
                    return action;
                }
                pick -= 1;
            }
        }
        unreachable!("an unvisited action exists");
    }
    let ln_n = f64::from(node.visits).ln();
    let mut best = Action::DoNothing;
    let mut best_score = f64::INFINITY;
    for action in Action::ALL {
        let i = action.index();
        let score = node.q[i] - c * (ln_n / f64::from(node.action_visits[i])).sqrt();
        if score < best_score {
            best_score = score;
            best = action;
        }
    }
    best
}

/// Discounted cost of one uniform-random playout from `state` at time `t`
/// to the horizon, averaged over `n_rollout` runs. Discounting is anchored
/// at `t`.
pub fn rollout<R: Rng + ?Sized>(
    state: env::SystemState,
    t: usize,
    mcts: &MctsParams,
    model: &ModelParams,
    rng: &mut R,
) -> f64 {
    let runs = mcts.n_rollout.max(1);
    let mut total = 0.0;
    for _ in 0..runs {
        total += rollout_once(state, t, model, rng);
    }
    total / runs as f64
}

fn rollout_once<R: Rng + ?Sized>(
    mut state: env::SystemState,
    t: usize,
    model: &ModelParams,
    rng: &mut R,
) -> f64 {
    let mut disc = 1.0;
    let mut total = 0.0;
    for _ in t..model.t_end {
        let action = Action::ALL[rng.random_range(0..4usize)];
        total += disc * env::step_cost(&state, action, model);
        state = env::transition(state, action, model, rng);
        disc *= model.gamma;
    }
    total + disc * env::failure_cost(&state, model)
}

/// Result of one tree search.
#[derive(Debug, Clone, Copy)]
pub struct SearchOutcome {
    /// Greedy recommendation: the root action with the smallest Q.
    pub action: Action,
    /// Root Q estimates (discounted cost-to-go from the root timestep).
    pub q: [f64; 4],
    /// Root visit counts per action.
    pub visits: [u32; 4],
}

/// Arena-allocated search tree.
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<Node>,
}

impl SearchTree {
    pub fn new() -> Self {
        SearchTree { nodes: vec![Node::new()] }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, idx: u32) -> &Node {
        &self.nodes[idx as usize]
    }

    /// Bookkeeping invariant: `N(h) = sum_a N(h,a)` at every node.
    pub fn counts_consistent(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| n.visits == n.action_visits.iter().sum::<u32>())
    }

    /// Run `n_tree` iterations from `root` for the belief `belief`
    /// (its `t` field is the decision timestep).
    pub fn search(
        &mut self,
        root: u32,
        belief: &BeliefMean,
        mcts: &MctsParams,
        model: &ModelParams,
        schedule: &CovarianceSchedule,
        rng: &mut ChaCha8Rng,
    ) -> Result<SearchOutcome> {
        mcts.validate()?;
        if mcts.n_tree == 0 {
            return Err(Error::Config("n_tree must be positive".into()));
        }
        if belief.t + 1 > model.t_end {
            return Err(Error::Config(format!("no decision at t = {}", belief.t)));
        }
        for _ in 0..mcts.n_tree {
            let state = sample_state(belief, schedule, belief.t, rng)?;
            self.simulate(root, state, belief.t, mcts, model, rng);
        }
        let node = self.node(root);
        let mut best = Action::DoNothing;
        let mut best_q = f64::INFINITY;
        for action in Action::ALL {
            let i = action.index();
            if node.action_visits[i] > 0 && node.q[i] < best_q {
                best_q = node.q[i];
                best = action;
            }
        }
        Ok(SearchOutcome { action: best, q: node.q, visits: node.action_visits })
    }

    /// One selection/expansion/rollout/backpropagation pass. Returns the
    /// realized discounted return from `t`, which is folded into the Q
    /// means on the way back up.
    fn simulate(
        &mut self,
        node_idx: u32,
        state: env::SystemState,
        t: usize,
        mcts: &MctsParams,
        model: &ModelParams,
        rng: &mut ChaCha8Rng,
    ) -> f64 {
        let action = uct_select(self.node(node_idx), mcts.c, rng);
        let cost = env::step_cost(&state, action, model);
        let next = env::transition(state, action, model, rng);

        let q = if t + 1 == model.t_end {
            // Only the terminal failure check remains beyond this action.
            cost + model.gamma * env::failure_cost(&next, model)
        } else {
            let obs = env::observe(&next, model, rng);
            let key = child_key(action, bucketize(obs, mcts));
            match self.node(node_idx).child(key) {
                Some(child) => {
                    cost + model.gamma * self.simulate(child, next, t + 1, mcts, model, rng)
                }
                None => {
                    let child = self.nodes.len() as u32;
                    self.nodes.push(Node::new());
                    self.nodes[node_idx as usize].children.push((key, child));
                    cost + model.gamma * rollout(next, t + 1, mcts, model, rng)
                }
            }
        };

        let node = &mut self.nodes[node_idx as usize];
        node.visits += 1;
        let i = action.index();
        node.action_visits[i] += 1;
        node.q[i] += (q - node.q[i]) / f64::from(node.action_visits[i]);
        q
    }
}

impl Default for SearchTree {
    fn default() -> Self {
        Self::new()
    }
}

/// Plan once from a belief with a fresh tree.
pub fn tree_search(
    belief: &BeliefMean,
    mcts: &MctsParams,
    model: &ModelParams,
    schedule: &CovarianceSchedule,
    rng: &mut ChaCha8Rng,
) -> Result<(SearchOutcome, SearchTree)> {
    let mut tree = SearchTree::new();
    let outcome = tree.search(0, belief, mcts, model, schedule, rng)?;
    Ok((outcome, tree))
}

/// Online planner: tracks the analytic belief and re-plans at every
/// decision epoch.
pub struct MctsPolicy {
    mcts: MctsParams,
    model: ModelParams,
    filter: BeliefFilter,
    last_action: Action,
    /// Retained (tree, root) when `reuse_tree` is on.
    carried: Option<(SearchTree, u32)>,
}

impl MctsPolicy {
    pub fn new(mcts: MctsParams, model: ModelParams) -> Self {
        let schedule = crate::belief::precompute_schedule(&model);
        MctsPolicy {
            mcts,
            model,
            filter: BeliefFilter::new(model, schedule),
            last_action: Action::DoNothing,
            carried: None,
        }
    }
}

impl Policy for MctsPolicy {
    fn reset(&mut self) {
        self.filter.reset();
        self.last_action = Action::DoNothing;
        self.carried = None;
    }

    fn act(&mut self, _t: usize, obs: f64, rng: &mut ChaCha8Rng) -> Action {
        let belief = self.filter.advance(self.last_action, obs);
        let (mut tree, root) = match self.carried.take() {
            Some((tree, old_root)) => {
                // Descend into the branch that actually happened.
                let key = child_key(self.last_action, bucketize(obs, &self.mcts));
                match tree.node(old_root).child(key) {
                    Some(child) => (tree, child),
                    None => (SearchTree::new(), 0),
                }
            }
            None => (SearchTree::new(), 0),
        };
        let outcome = tree
            .search(root, &belief, &self.mcts, &self.model, self.filter.schedule(), rng)
            .expect("decision epochs run 1..t_end-1");
        if self.mcts.reuse_tree {
            self.carried = Some((tree, root));
        }
        self.last_action = outcome.action;
        outcome.action
    }
}
