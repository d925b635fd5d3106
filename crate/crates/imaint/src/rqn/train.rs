//! Batch collection, the BPTT training loop, grid search, and checkpoints.

use ndarray::{s, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adam::AdamState;
use super::net::{
    self, backward_step, forward, forward_cached, BackFlow, NetworkParams, NetworkShape,
    RecurrentState,
};
use crate::config::KvConfig;
use crate::env::{self, Action, ModelParams};
use crate::{Error, Result};

/// Training hyperparameters. Defaults follow the fixed optimizer table
/// (Adam with AMSGRAD, learning rate 1e-3, batch 500, at most 500 epochs,
/// target refresh every 3 epochs, epsilon step 0.1); the searched
/// parameters (`weight_decay`, `epsilon_max`, `lr_step`, `lr_factor`)
/// default to neutral values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub amsgrad: bool,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Target network refresh period `p`.
    pub target_update_period: usize,
    /// Starting value of the exploration rate.
    pub epsilon_max: f64,
    /// Linear decrement applied to epsilon.
    pub epsilon_step: f64,
    /// Epochs between decrements; 0 picks a cadence that reaches zero by
    /// mid-training, `ceil(max_epochs / (10 * epsilon_max / epsilon_step))`.
    pub epsilon_decay_every: usize,
    /// L2 penalty coefficient added to the loss.
    pub weight_decay: f64,
    /// Learning-rate decay period `m`; 0 disables the schedule.
    pub lr_step: usize,
    /// Learning-rate multiplier applied every `lr_step` epochs.
    pub lr_factor: f64,
    /// Early stopping: stop after this many epochs without a new best
    /// training cost.
    pub patience: usize,
    pub seed: u64,
    /// Evaluate the greedy policy every this many epochs (0 = never).
    pub eval_every: usize,
    /// Trajectories per in-training evaluation.
    pub eval_n: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            amsgrad: true,
            batch_size: 500,
            max_epochs: 500,
            target_update_period: 3,
            epsilon_max: 0.3,
            epsilon_step: 0.1,
            epsilon_decay_every: 0,
            weight_decay: 0.0,
            lr_step: 0,
            lr_factor: 1.0,
            patience: 50,
            seed: 0,
            eval_every: 0,
            eval_n: 2000,
        }
    }
}

impl TrainConfig {
    pub fn from_kv(cfg: &KvConfig) -> Result<Self> {
        let d = TrainConfig::default();
        Ok(TrainConfig {
            lr: cfg.f64("lr", d.lr)?,
            beta1: cfg.f64("beta1", d.beta1)?,
            beta2: cfg.f64("beta2", d.beta2)?,
            adam_eps: cfg.f64("adam_eps", d.adam_eps)?,
            amsgrad: cfg.bool("amsgrad", d.amsgrad)?,
            batch_size: cfg.usize("batch_size", d.batch_size)?,
            max_epochs: cfg.usize("max_epochs", d.max_epochs)?,
            target_update_period: cfg.usize("target_update", d.target_update_period)?,
            epsilon_max: cfg.f64("epsilon_max", d.epsilon_max)?,
            epsilon_step: cfg.f64("epsilon_step", d.epsilon_step)?,
            epsilon_decay_every: cfg.usize("epsilon_decay_every", d.epsilon_decay_every)?,
            weight_decay: cfg.f64("weight_decay", d.weight_decay)?,
            lr_step: cfg.usize("lr_step", d.lr_step)?,
            lr_factor: cfg.f64("lr_factor", d.lr_factor)?,
            patience: cfg.usize("patience", d.patience)?,
            seed: cfg.usize("seed", d.seed as usize)? as u64,
            eval_every: cfg.usize("eval_every", d.eval_every)?,
            eval_n: cfg.usize("eval_n", d.eval_n)?,
        })
    }

    /// Effective epsilon at a given epoch under the linear schedule.
    pub fn epsilon_at(&self, epoch: usize) -> f64 {
        if self.epsilon_max <= 0.0 || self.epsilon_step <= 0.0 {
            return self.epsilon_max.max(0.0);
        }
        let cadence = if self.epsilon_decay_every > 0 {
            self.epsilon_decay_every
        } else {
            let steps = (self.epsilon_max / self.epsilon_step).ceil();
            ((self.max_epochs as f64 / (10.0 * steps)).ceil() as usize).max(1)
        };
        (self.epsilon_max - self.epsilon_step * (epoch / cadence) as f64).max(0.0)
    }

    /// Effective learning rate at a given epoch under the step schedule.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if self.lr_step == 0 {
            return self.lr;
        }
        self.lr * self.lr_factor.powi((epoch / self.lr_step) as i32)
    }
}

/// A batch of complete trajectories laid out for training: observations
/// `o_1..o_{T-1}`, actions `a_0..a_{T-1}` (with `a_0` forced to `a0`), and
/// per-timestep cost totals `c_0..c_T`.
#[derive(Debug, Clone)]
pub struct BatchTrajectories {
    /// `[batch, t_end - 1]`; column `t-1` holds `o_t`.
    pub obs: Array2<f64>,
    /// `actions[i][t]` is the action trajectory `i` took at `t`.
    pub actions: Vec<Vec<Action>>,
    /// `[batch, t_end + 1]` cost totals.
    pub costs: Array2<f64>,
}

impl BatchTrajectories {
    pub fn batch_size(&self) -> usize {
        self.actions.len()
    }

    /// Discounted LCC of each trajectory.
    pub fn lccs(&self, gamma: f64) -> Vec<f64> {
        self.costs
            .axis_iter(Axis(0))
            .map(|row| {
                let mut disc = 1.0;
                let mut total = 0.0;
                for &c in row.iter() {
                    total += disc * c;
                    disc *= gamma;
                }
                total
            })
            .collect()
    }
}

fn argmin_row(q: &Array2<f64>, row: usize) -> Action {
    let mut best = 0;
    let mut best_v = q[(row, 0)];
    for a in 1..4 {
        if q[(row, a)] < best_v {
            best_v = q[(row, a)];
            best = a;
        }
    }
    Action::from_index(best).unwrap()
}

/// Simulate `batch` trajectories in lockstep under the epsilon-greedy
/// behavior policy of `params`.
///
/// Every trajectory owns RNG stream `stream_offset + i` of the seed, so
/// batches are reproducible and independent across epochs.
pub fn collect_batch(
    params: &NetworkParams,
    epsilon: f64,
    env: &ModelParams,
    batch: usize,
    seed: u64,
    stream_offset: u64,
) -> BatchTrajectories {
    let t_end = env.t_end;
    let mut rngs: Vec<ChaCha8Rng> = (0..batch)
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(stream_offset + i as u64);
            r
        })
        .collect();

    let mut obs = Array2::zeros((batch, t_end - 1));
    let mut costs = Array2::zeros((batch, t_end + 1));
    let mut actions: Vec<Vec<Action>> = vec![Vec::with_capacity(t_end); batch];

    // t = 0: initial state, failure check, forced a0.
    let mut states: Vec<env::SystemState> = Vec::with_capacity(batch);
    for (i, rng) in rngs.iter_mut().enumerate() {
        let s = env::sample_initial(env, rng);
        costs[(i, 0)] = env::failure_cost(&s, env);
        actions[i].push(Action::DoNothing);
        states.push(env::transition(s, Action::DoNothing, env, rng));
    }

    let mut rec = RecurrentState::zeros(batch, params.shape.hidden);
    let mut prev = net::one_hot(&vec![Action::DoNothing; batch]);

    for t in 1..t_end {
        for i in 0..batch {
            costs[(i, t)] = env::failure_cost(&states[i], env);
            obs[(i, t - 1)] = env::observe(&states[i], env, &mut rngs[i]);
        }
        let obs_col = obs.slice(s![.., t - 1..t]).to_owned();
        let out = forward(params, &obs_col, &prev, &rec);
        rec = out.state;

        let mut chosen = Vec::with_capacity(batch);
        for i in 0..batch {
            let explore = epsilon > 0.0 && rngs[i].random::<f64>() < epsilon;
            let a = if explore {
                Action::ALL[rngs[i].random_range(0..4usize)]
            } else {
                argmin_row(&out.q, i)
            };
            costs[(i, t)] += env.cost_action[a.index()];
            states[i] = env::transition(states[i], a, env, &mut rngs[i]);
            actions[i].push(a);
            chosen.push(a);
        }
        prev = net::one_hot(&chosen);
    }

    for i in 0..batch {
        costs[(i, t_end)] = env::failure_cost(&states[i], env);
    }

    BatchTrajectories { obs, actions, costs }
}

/// Full training loss on a batch: the life-cycle-accumulated MSE between
/// the Q-value of the behavior-selected action and the Bellman target from
/// the frozen target network, plus the L2 penalty.
///
/// Regression terms run `t = 1..=t_end-2`; the target at `t` bootstraps
/// the greedy target-network value at `t+1` and there is no bootstrap
/// beyond the horizon.
pub fn lcc_mse_loss(
    params: &NetworkParams,
    target: &NetworkParams,
    batch: &BatchTrajectories,
    env: &ModelParams,
    weight_decay: f64,
) -> f64 {
    loss_impl(params, target, batch, env, weight_decay, false).0
}

/// Loss plus parameter gradients via backpropagation through time.
pub fn loss_and_grads(
    params: &NetworkParams,
    target: &NetworkParams,
    batch: &BatchTrajectories,
    env: &ModelParams,
    weight_decay: f64,
) -> (f64, NetworkParams) {
    let (loss, grads) = loss_impl(params, target, batch, env, weight_decay, true);
    (loss, grads.expect("gradients requested"))
}

fn loss_impl(
    params: &NetworkParams,
    target: &NetworkParams,
    batch: &BatchTrajectories,
    env: &ModelParams,
    weight_decay: f64,
    want_grads: bool,
) -> (f64, Option<NetworkParams>) {
    let t_end = env.t_end;
    let b = batch.batch_size();
    let bf = b as f64;
    let hidden = params.shape.hidden;

    // Bellman targets need min_a Q_target at tau = 2..=t_end-1, where the
    // target network consumes (o_tau, a_{tau-1}) along its own recurrence.
    let mut min_next = Array2::zeros((b, t_end));
    {
        let mut state = RecurrentState::zeros(b, hidden);
        let mut prev = net::one_hot(&vec![Action::DoNothing; b]);
        for tau in 1..t_end {
            let obs_col = batch.obs.slice(s![.., tau - 1..tau]).to_owned();
            let out = forward(target, &obs_col, &prev, &state);
            state = out.state;
            if tau >= 2 {
                for i in 0..b {
                    let q = out.q.row(i);
                    min_next[(i, tau)] = q.iter().fold(f64::INFINITY, |m, &v| m.min(v));
                }
            }
            let taken: Vec<Action> = (0..b).map(|i| batch.actions[i][tau]).collect();
            prev = net::one_hot(&taken);
        }
    }

    // Behavior chain with caches; accumulate the squared errors and the
    // per-step output gradients.
    let mut caches = Vec::with_capacity(t_end.saturating_sub(2));
    let mut dqs = Vec::with_capacity(t_end.saturating_sub(2));
    let mut mse_sum = 0.0;
    {
        let mut state = RecurrentState::zeros(b, hidden);
        let mut prev = net::one_hot(&vec![Action::DoNothing; b]);
        for t in 1..t_end.saturating_sub(1) {
            let obs_col = batch.obs.slice(s![.., t - 1..t]).to_owned();
            let (out, cache) = forward_cached(params, &obs_col, &prev, &state);
            state = out.state;
            let mut dq = Array2::zeros((b, 4));
            for i in 0..b {
                let a = batch.actions[i][t];
                let y_nn = out.q[(i, a.index())];
                let y_tar = batch.costs[(i, t)] + env.gamma * min_next[(i, t + 1)];
                let diff = y_nn - y_tar;
                mse_sum += diff * diff;
                dq[(i, a.index())] = 2.0 * diff / bf;
            }
            caches.push(cache);
            dqs.push(dq);
            let taken: Vec<Action> = (0..b).map(|i| batch.actions[i][t]).collect();
            prev = net::one_hot(&taken);
        }
    }

    let loss = mse_sum / bf + weight_decay * params.squared_norm();
    if !want_grads {
        return (loss, None);
    }

    let mut grads = NetworkParams::zeros(params.shape);
    let mut flow = BackFlow {
        dh: Array2::zeros((b, hidden)),
        dc: Array2::zeros((b, hidden)),
    };
    for (cache, dq) in caches.iter().zip(dqs.iter()).rev() {
        flow = backward_step(params, cache, dq, flow, &mut grads);
    }

    if weight_decay != 0.0 {
        let param_views = params.views();
        let mut pv = param_views.iter();
        for gv in grads.views_mut() {
            let (_, p, _) = pv.next().unwrap();
            for (g, &w) in gv.iter_mut().zip(p.iter()) {
                *g += 2.0 * weight_decay * w;
            }
        }
    }

    (loss, Some(grads))
}

/// Per-epoch training log record. `eval_mean_lcc` is NaN for epochs
/// without an evaluation pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub cost: f64,
    pub epsilon: f64,
    pub lr: f64,
    pub eval_mean_lcc: f64,
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    pub log: Vec<EpochLog>,
}

/// Mutable training state: current network, frozen target, optimizer.
pub struct Trainer {
    pub params: NetworkParams,
    pub target: NetworkParams,
    adam: AdamState,
    pub config: TrainConfig,
    env: ModelParams,
    epoch: usize,
}

impl Trainer {
    pub fn new(config: TrainConfig, env: ModelParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params = NetworkParams::init(NetworkShape::default(), &mut rng);
        let target = params.clone();
        let adam = AdamState::new(
            params.param_count(),
            config.beta1,
            config.beta2,
            config.adam_eps,
            config.amsgrad,
        );
        Trainer { params, target, adam, config, env, epoch: 0 }
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Refresh the frozen target from the current network.
    pub fn refresh_target(&mut self) {
        self.target = self.params.clone();
    }

    /// One optimization step on a collected batch; returns the epoch cost.
    /// A non-finite cost skips the parameter update.
    pub fn train_epoch(&mut self, batch: &BatchTrajectories) -> f64 {
        let (loss, grads) = loss_and_grads(
            &self.params,
            &self.target,
            batch,
            &self.env,
            self.config.weight_decay,
        );
        if loss.is_finite() {
            self.adam.step(&mut self.params, &grads, self.config.lr_at(self.epoch));
        }
        self.epoch += 1;
        loss
    }
}

/// Full training procedure: alternate collection and optimization, clone
/// the target every `p` epochs, decay epsilon and the learning rate on
/// their schedules, stop early when the cost stagnates, and fail after
/// three consecutive non-finite costs.
pub fn train(config: &TrainConfig, env: &ModelParams) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(*config, *env);
    let mut log = Vec::new();
    let mut best_cost = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut bad_streak = 0usize;

    for epoch in 0..config.max_epochs {
        if config.target_update_period > 0 && epoch % config.target_update_period == 0 {
            trainer.refresh_target();
        }
        let epsilon = config.epsilon_at(epoch);
        let batch = collect_batch(
            &trainer.params,
            epsilon,
            env,
            config.batch_size,
            config.seed.wrapping_add(1),
            (epoch * config.batch_size) as u64,
        );
        let cost = trainer.train_epoch(&batch);

        if !cost.is_finite() {
            bad_streak += 1;
            if bad_streak >= 3 {
                return Err(Error::Divergence(format!(
                    "non-finite training cost for {bad_streak} consecutive epochs"
                )));
            }
        } else {
            bad_streak = 0;
        }

        let eval_mean = if config.eval_every > 0 && (epoch + 1) % config.eval_every == 0 {
            evaluate_greedy(&trainer.params, env, config.eval_n, config.seed.wrapping_add(2)).mean
        } else {
            f64::NAN
        };
        log.push(EpochLog {
            epoch,
            cost,
            epsilon,
            lr: config.lr_at(epoch),
            eval_mean_lcc: eval_mean,
        });

        if cost.is_finite() && cost < best_cost {
            best_cost = cost;
            best_epoch = epoch;
        } else if epoch - best_epoch >= config.patience {
            break;
        }
    }

    Ok(TrainOutcome { params: trainer.params, log })
}

/// Greedy-policy evaluation summary.
#[derive(Debug, Clone)]
pub struct GreedyEval {
    pub lccs: Vec<f64>,
    /// Action counts per timestep `t = 1..=t_end-1`.
    pub action_counts: Vec<[u64; 4]>,
    pub mean: f64,
    pub std: f64,
    pub se: f64,
}

/// Evaluate the greedy policy of `params` over `n` trajectories.
///
/// Runs in lockstep chunks; trajectory `i` always uses RNG stream `i` of
/// `seed`, so results do not depend on the chunking.
pub fn evaluate_greedy(params: &NetworkParams, env: &ModelParams, n: usize, seed: u64) -> GreedyEval {
    const CHUNK: usize = 1000;
    let mut lccs = Vec::with_capacity(n);
    let mut action_counts = vec![[0u64; 4]; env.t_end - 1];
    let mut start = 0;
    while start < n {
        let size = CHUNK.min(n - start);
        let batch = collect_batch(params, 0.0, env, size, seed, start as u64);
        lccs.extend(batch.lccs(env.gamma));
        for traj in &batch.actions {
            for t in 1..env.t_end {
                action_counts[t - 1][traj[t].index()] += 1;
            }
        }
        start += size;
    }
    let (mean, std, se) = summarize(&lccs);
    GreedyEval { lccs, action_counts, mean, std, se }
}

pub(crate) fn summarize(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let std = var.sqrt();
    (mean, std, std / n.sqrt())
}

/// Search grids for the four tuned hyperparameters.
#[derive(Debug, Clone)]
pub struct GridSearchSpace {
    pub weight_decay: Vec<f64>,
    pub epsilon_max: Vec<f64>,
    pub lr_step: Vec<usize>,
    pub lr_factor: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct LeaderboardEntry {
    pub weight_decay: f64,
    pub epsilon_max: f64,
    pub lr_step: usize,
    pub lr_factor: f64,
    pub mean_lcc: f64,
    pub std_lcc: f64,
    pub n_eval: usize,
}

#[derive(Debug, Clone)]
pub struct GridSearchOutcome {
    pub best_config: TrainConfig,
    pub best_params: NetworkParams,
    pub leaderboard: Vec<LeaderboardEntry>,
}

/// Train one network per grid point, evaluate each greedy policy by Monte
/// Carlo, and return the configuration with the smallest mean LCC along
/// with the full leaderboard.
pub fn grid_search(
    space: &GridSearchSpace,
    base: &TrainConfig,
    env: &ModelParams,
    eval_n: usize,
) -> Result<GridSearchOutcome> {
    if space.weight_decay.is_empty()
        || space.epsilon_max.is_empty()
        || space.lr_step.is_empty()
        || space.lr_factor.is_empty()
    {
        return Err(Error::Config("grid search space has an empty axis".into()));
    }
    let mut leaderboard = Vec::new();
    let mut best: Option<(f64, TrainConfig, NetworkParams)> = None;
    for &weight_decay in &space.weight_decay {
        for &epsilon_max in &space.epsilon_max {
            for &lr_step in &space.lr_step {
                for &lr_factor in &space.lr_factor {
                    let config = TrainConfig {
                        weight_decay,
                        epsilon_max,
                        lr_step,
                        lr_factor,
                        ..*base
                    };
                    let outcome = train(&config, env)?;
                    let eval =
                        evaluate_greedy(&outcome.params, env, eval_n, config.seed.wrapping_add(3));
                    leaderboard.push(LeaderboardEntry {
                        weight_decay,
                        epsilon_max,
                        lr_step,
                        lr_factor,
                        mean_lcc: eval.mean,
                        std_lcc: eval.std,
                        n_eval: eval_n,
                    });
                    if best.as_ref().is_none_or(|(m, _, _)| eval.mean < *m) {
                        best = Some((eval.mean, config, outcome.params));
                    }
                }
            }
        }
    }
    let (best_mean, best_config, best_params) = best.expect("non-empty grid");
    assert!(
        leaderboard.iter().all(|e| best_mean <= e.mean_lcc),
        "selected config must minimize the evaluated mean LCC"
    );
    Ok(GridSearchOutcome { best_config, best_params, leaderboard })
}

/// Save parameters as a plain-text tensor dump: a header line, the shape,
/// then per tensor a `tensor <name> <rows> <cols>` line followed by one
/// row of space-separated values per line. Floats are written in Rust's
/// shortest round-trip form.
pub fn save_checkpoint(params: &NetworkParams, path: &std::path::Path) -> Result<()> {
    let mut out = String::from("imaint-rqn v1\n");
    let s = params.shape;
    out.push_str(&format!("shape {} {} {} {}\n", s.fc1, s.fc2, s.hidden, s.fc3));
    for (name, values, (rows, cols)) in params.views() {
        out.push_str(&format!("tensor {name} {rows} {cols}\n"));
        for r in 0..rows {
            let row: Vec<String> = values[r * cols..(r + 1) * cols]
                .iter()
                .map(|v| format!("{v}"))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Load a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: &std::path::Path) -> Result<NetworkParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let bad = |msg: &str| Error::Config(format!("{}: {msg}", path.display()));
    if lines.next() != Some("imaint-rqn v1") {
        return Err(bad("missing `imaint-rqn v1` header"));
    }
    let shape_line = lines.next().ok_or_else(|| bad("missing shape line"))?;
    let dims: Vec<usize> = shape_line
        .strip_prefix("shape ")
        .ok_or_else(|| bad("missing shape line"))?
        .split_whitespace()
        .map(|v| v.parse().map_err(|_| bad("bad shape value")))
        .collect::<Result<_>>()?;
    if dims.len() != 4 {
        return Err(bad("shape line must have 4 dimensions"));
    }
    let shape = NetworkShape { fc1: dims[0], fc2: dims[1], hidden: dims[2], fc3: dims[3] };
    let mut params = NetworkParams::zeros(shape);
    let expected: Vec<(String, usize, usize)> = params
        .views()
        .iter()
        .map(|(name, _, (r, c))| (name.to_string(), *r, *c))
        .collect();
    let mut flat = Vec::with_capacity(params.param_count());
    for (name, rows, cols) in expected {
        let header = lines.next().ok_or_else(|| bad("truncated checkpoint"))?;
        if header != format!("tensor {name} {rows} {cols}") {
            return Err(bad(&format!("expected `tensor {name} {rows} {cols}`, got `{header}`")));
        }
        for _ in 0..rows {
            let line = lines.next().ok_or_else(|| bad("truncated tensor"))?;
            let mut count = 0;
            for tok in line.split_whitespace() {
                flat.push(tok.parse::<f64>().map_err(|_| bad("bad tensor value"))?);
                count += 1;
            }
            if count != cols {
                return Err(bad(&format!("tensor {name}: expected {cols} values per row")));
            }
        }
    }
    if flat.len() != params.param_count() {
        return Err(bad("wrong total parameter count"));
    }
    params.load_flat(&flat);
    Ok(params)
}

/// Training log CSV: `epoch,cost,epsilon,lr,eval_mean_lcc`.
pub fn training_log_csv(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch,cost,epsilon,lr,eval_mean_lcc\n");
    for e in log {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.epoch, e.cost, e.epsilon, e.lr, e.eval_mean_lcc
        ));
    }
    out
}
