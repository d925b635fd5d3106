//! Experiment orchestration: Monte Carlo policy evaluation, the
//! observation-noise sweep, action statistics, belief-space snapshots and
//! trajectories, baseline policies, and the CSV/JSON export plumbing.
//!
//! Evaluation is reproducible by construction: trajectory `i` of a run
//! always consumes RNG stream `i` of the run's seed, so reports are
//! bit-identical across repetitions and would not change under parallel
//! execution. Plotting stays out of process — everything is tidy CSV/JSON
//! for external tools.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{precompute_schedule, BeliefFilter, BeliefMean};
use crate::env::{self, Action, ModelParams, Policy};
use crate::mcts::{tree_search, MctsParams, MctsPolicy};
use crate::rqn;
use crate::vi::{self, BeliefGrid, ViSolution};
use crate::{Error, Result};

/// Solution methods the harness can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Vi,
    Mcts,
    Rqn,
    BenchmarkA1,
    Random,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Vi => "vi",
            Method::Mcts => "mcts",
            Method::Rqn => "rqn",
            Method::BenchmarkA1 => "benchmark-a1",
            Method::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "vi" => Ok(Method::Vi),
            "mcts" => Ok(Method::Mcts),
            "rqn" => Ok(Method::Rqn),
            "benchmark-a1" => Ok(Method::BenchmarkA1),
            "random" => Ok(Method::Random),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// The default observation-noise sweep, covering both saturation regions.
pub const DEFAULT_SIGMA_SWEEP: [f64; 13] = [
    0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0,
];

/// Aggregated Monte Carlo evaluation of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub sigma_e: f64,
    pub seed: u64,
    pub n: usize,
    pub mean_lcc: f64,
    pub std_lcc: f64,
    pub standard_error: f64,
    /// Action frequencies per timestep `t = 1..=t_end-1`; rows sum to 1.
    pub action_freq: Vec<[f64; 4]>,
    /// Per-trajectory discounted LCCs in trajectory order.
    pub lccs: Vec<f64>,
}

/// Always choose the same action, whatever the observation.
pub struct AlwaysPolicy(pub Action);

impl Policy for AlwaysPolicy {
    fn reset(&mut self) {}
    fn act(&mut self, _t: usize, _obs: f64, _rng: &mut ChaCha8Rng) -> Action {
        self.0
    }
}

/// The a-priori benchmark: action `a1` at every decision epoch.
pub fn benchmark_a1_policy() -> AlwaysPolicy {
    AlwaysPolicy(Action::ReduceRate)
}

/// Uniformly random action each step (the rollout policy, as a baseline).
pub struct UniformRandomPolicy;

impl Policy for UniformRandomPolicy {
    fn reset(&mut self) {}
    fn act(&mut self, _t: usize, _obs: f64, rng: &mut ChaCha8Rng) -> Action {
        use rand::Rng;
        Action::ALL[rng.random_range(0..4usize)]
    }
}

/// Evaluate a policy over `n` independent trajectories.
pub fn evaluate<P: Policy + ?Sized>(
    policy: &mut P,
    method: &str,
    params: &ModelParams,
    n: usize,
    seed: u64,
) -> EvalReport {
    let mut lccs = Vec::with_capacity(n);
    let mut counts = vec![[0u64; 4]; params.t_end - 1];
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let traj = env::simulate_trajectory(policy, params, &mut rng);
        lccs.push(traj.discounted_lcc);
        for t in 1..params.t_end {
            counts[t - 1][traj.actions[t].index()] += 1;
        }
    }
    report_from_parts(method, params, seed, lccs, &counts)
}

/// Evaluate a trained network with the batched lockstep evaluator (the
/// fast path used for large trajectory counts).
pub fn evaluate_rqn(
    net: &rqn::NetworkParams,
    params: &ModelParams,
    n: usize,
    seed: u64,
) -> EvalReport {
    let eval = rqn::evaluate_greedy(net, params, n, seed);
    report_from_parts("rqn", params, seed, eval.lccs, &eval.action_counts)
}

fn report_from_parts(
    method: &str,
    params: &ModelParams,
    seed: u64,
    lccs: Vec<f64>,
    counts: &[[u64; 4]],
) -> EvalReport {
    let n = lccs.len();
    let (mean, std, se) = summarize(&lccs);
    let action_freq = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            let mut freq = [0.0; 4];
            for (f, &c) in freq.iter_mut().zip(row.iter()) {
                *f = c as f64 / total as f64;
            }
            freq
        })
        .collect();
    EvalReport {
        method: method.to_string(),
        sigma_e: params.sigma_e,
        seed,
        n,
        mean_lcc: mean,
        std_lcc: std,
        standard_error: se,
        action_freq,
        lccs,
    }
}

fn summarize(xs: &[f64]) -> (f64, f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt(), var.sqrt() / n.sqrt())
}

/// Per-timestep action frequency table of a report (rows `t = 1..`).
pub fn action_statistics(report: &EvalReport) -> &[[f64; 4]] {
    &report.action_freq
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

/// One row of the method-comparison sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub sigma_e: f64,
    pub mean: f64,
    pub std: f64,
    pub se: f64,
    pub n: usize,
}

/// What to run in a sweep. Evaluation sizes default to the comparison
/// figures' sample counts; shrink them for quick runs.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub methods: Vec<Method>,
    pub sigmas: Vec<f64>,
    pub params: ModelParams,
    pub seed: u64,
    pub n_vi: usize,
    pub n_mcts: usize,
    pub n_rqn: usize,
    pub n_baseline: usize,
    pub grid: BeliefGrid,
    pub split_k_mass: bool,
    pub mcts: MctsParams,
    /// Directory holding `rqn_sigma_<sigma>.txt` checkpoints; required
    /// when `methods` includes the network.
    pub rqn_dir: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(params: ModelParams) -> Self {
        SweepSpec {
            methods: vec![Method::Vi, Method::Mcts, Method::BenchmarkA1],
            sigmas: DEFAULT_SIGMA_SWEEP.to_vec(),
            params,
            seed: 0,
            n_vi: 2_000_000,
            n_mcts: 2_000,
            n_rqn: 1_000_000,
            n_baseline: 100_000,
            grid: BeliefGrid::default(),
            split_k_mass: false,
            mcts: MctsParams::default(),
            rqn_dir: None,
        }
    }

    /// Checkpoint path for one noise level.
    pub fn rqn_checkpoint_path(&self, sigma: f64) -> Result<PathBuf> {
        let dir = self
            .rqn_dir
            .as_ref()
            .ok_or_else(|| Error::Config("sweep over rqn needs --rqn-dir".into()))?;
        Ok(dir.join(format!("rqn_sigma_{sigma}.txt")))
    }
}

/// Run the sweep: evaluate every requested method at every noise level.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &sigma in &spec.sigmas {
        let params = spec.params.with_sigma_e(sigma);
        for &method in &spec.methods {
            let report = match method {
                Method::Vi => {
                    let solution = vi::solve(spec.grid.clone(), &params, spec.split_k_mass)?;
                    let mut policy = solution.policy();
                    evaluate(&mut policy, "vi", &params, spec.n_vi, spec.seed)
                }
                Method::Mcts => {
                    let mut policy = MctsPolicy::new(spec.mcts, params);
                    evaluate(&mut policy, "mcts", &params, spec.n_mcts, spec.seed)
                }
                Method::Rqn => {
                    let path = spec.rqn_checkpoint_path(sigma)?;
                    if !path.exists() {
                        return Err(Error::Config(format!(
                            "missing rqn checkpoint {}",
                            path.display()
                        )));
                    }
                    let net = rqn::load_checkpoint(&path)?;
                    evaluate_rqn(&net, &params, spec.n_rqn, spec.seed)
                }
                Method::BenchmarkA1 => {
                    let mut policy = benchmark_a1_policy();
                    evaluate(&mut policy, "benchmark-a1", &params, spec.n_baseline, spec.seed)
                }
                Method::Random => {
                    let mut policy = UniformRandomPolicy;
                    evaluate(&mut policy, "random", &params, spec.n_baseline, spec.seed)
                }
            };
            rows.push(SweepRow {
                method: report.method.clone(),
                sigma_e: sigma,
                mean: report.mean_lcc,
                std: report.std_lcc,
                se: report.standard_error,
                n: report.n,
            });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Belief-space views
// ---------------------------------------------------------------------------

/// One tracked belief point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefRecord {
    pub trajectory: usize,
    pub t: usize,
    pub mu_d: f64,
    pub mu_k: f64,
    pub action: Action,
}

/// Run a policy while co-running the analytic belief filter; returns one
/// record per decision epoch per trajectory.
///
/// The filter replays the trajectory's observation-action history, so any
/// policy can be tracked, including the belief-free network.
pub fn belief_trajectories<P: Policy + ?Sized>(
    policy: &mut P,
    params: &ModelParams,
    n: usize,
    seed: u64,
) -> Vec<BeliefRecord> {
    let schedule = precompute_schedule(params);
    let mut filter = BeliefFilter::new(*params, schedule);
    let mut records = Vec::with_capacity(n * (params.t_end - 1));
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let traj = env::simulate_trajectory(policy, params, &mut rng);
        filter.reset();
        for t in 1..params.t_end {
            let belief = filter.advance(traj.actions[t - 1], traj.observation(t));
            records.push(BeliefRecord {
                trajectory: i,
                t,
                mu_d: belief.mu_d,
                mu_k: belief.mu_k,
                action: traj.actions[t],
            });
        }
    }
    records
}

/// Sources that can answer "which action at this belief, at this t".
pub enum SnapshotSource<'a> {
    /// Table lookup in the solved grid policy.
    Vi(&'a ViSolution),
    /// One fresh tree search per queried cell.
    Mcts { mcts: MctsParams, params: ModelParams, seed: u64 },
}

/// Evaluate the policy at every cell midpoint of `grid` at time `t`.
///
/// The network cannot answer imposed-belief queries (beliefs can only be
/// tracked along its trajectories); use [`belief_trajectories`] and filter
/// to the timestep of interest instead.
pub fn policy_grid_snapshot(
    source: &SnapshotSource,
    t: usize,
    grid: &BeliefGrid,
) -> Result<Vec<(usize, Action)>> {
    let mut out = Vec::with_capacity(grid.n_cells());
    match source {
        SnapshotSource::Vi(solution) => {
            for cell in 0..grid.n_cells() {
                let (mu_d, mu_k) = grid.midpoint(cell);
                out.push((cell, solution.action_at(t, mu_d, mu_k)?));
            }
        }
        SnapshotSource::Mcts { mcts, params, seed } => {
            let schedule = precompute_schedule(params);
            if t == 0 || t >= params.t_end {
                return Err(Error::Config(format!("no decision at t = {t}")));
            }
            for cell in 0..grid.n_cells() {
                let (mu_d, mu_k) = grid.midpoint(cell);
                let belief = BeliefMean { mu_d, mu_k, t };
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(cell as u64);
                let (outcome, _) = tree_search(&belief, mcts, params, &schedule, &mut rng)?;
                out.push((cell, outcome.action));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// CSV / JSON plumbing
// ---------------------------------------------------------------------------

/// `episode,lcc` per trajectory.
pub fn lcc_csv(lccs: &[f64]) -> String {
    let mut out = String::from("episode,lcc\n");
    for (i, lcc) in lccs.iter().enumerate() {
        out.push_str(&format!("{i},{lcc}\n"));
    }
    out
}

pub fn parse_lcc_csv(text: &str) -> Result<Vec<f64>> {
    parse_csv(text, "episode,lcc", |fields, _| {
        fields
            .get(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Config("bad lcc row".into()))
    })
}

/// `t,a0,a1,a2,a3` frequency rows.
pub fn action_stats_csv(report: &EvalReport) -> String {
    let mut out = String::from("t,a0,a1,a2,a3\n");
    for (i, row) in report.action_freq.iter().enumerate() {
        out.push_str(&format!("{},{},{},{},{}\n", i + 1, row[0], row[1], row[2], row[3]));
    }
    out
}

pub fn parse_action_stats_csv(text: &str) -> Result<Vec<[f64; 4]>> {
    parse_csv(text, "t,a0,a1,a2,a3", |fields, _| {
        let mut row = [0.0; 4];
        if fields.len() != 5 {
            return Err(Error::Config("bad action stats row".into()));
        }
        for (slot, tok) in row.iter_mut().zip(&fields[1..]) {
            *slot = tok
                .parse()
                .map_err(|_| Error::Config("bad action stats value".into()))?;
        }
        Ok(row)
    })
}

/// `method,sigma_e,mean,std,se,n` rows.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("method,sigma_e,mean,std,se,n\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method, r.sigma_e, r.mean, r.std, r.se, r.n
        ));
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    parse_csv(text, "method,sigma_e,mean,std,se,n", |fields, _| {
        if fields.len() != 6 {
            return Err(Error::Config("bad sweep row".into()));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| Error::Config("bad sweep value".into()))
        };
        Ok(SweepRow {
            method: fields[0].to_string(),
            sigma_e: num(1)?,
            mean: num(2)?,
            std: num(3)?,
            se: num(4)?,
            n: fields[5]
                .parse()
                .map_err(|_| Error::Config("bad sweep n".into()))?,
        })
    })
}

/// Belief records as `trajectory,t,mu_d,mu_k,action`.
pub fn belief_records_csv(records: &[BeliefRecord]) -> String {
    let mut out = String::from("trajectory,t,mu_d,mu_k,action\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.trajectory,
            r.t,
            r.mu_d,
            r.mu_k,
            r.action.label()
        ));
    }
    out
}

/// Snapshot cells as `t,cell_d,cell_k,mu_d,mu_k,action`.
pub fn snapshot_csv(grid: &BeliefGrid, t: usize, cells: &[(usize, Action)]) -> String {
    let mut out = String::from("t,cell_d,cell_k,mu_d,mu_k,action\n");
    for (cell, action) in cells {
        let (di, ki) = grid.cell_of(*cell);
        let (mu_d, mu_k) = grid.midpoint(*cell);
        out.push_str(&format!("{t},{di},{ki},{mu_d},{mu_k},{}\n", action.label()));
    }
    out
}

fn parse_csv<T>(
    text: &str,
    header: &str,
    mut row: impl FnMut(&[&str], usize) -> Result<T>,
) -> Result<Vec<T>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header => {}
        other => {
            return Err(Error::Config(format!(
                "expected header `{header}`, got `{}`",
                other.unwrap_or("")
            )))
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            row(&fields, i)
        })
        .collect()
}

/// JSON run summary: method, parameter echo, seed, metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: String,
    pub sigma_e: f64,
    pub seed: u64,
    pub n: usize,
    pub mean_lcc: f64,
    pub std_lcc: f64,
    pub standard_error: f64,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl RunSummary {
    pub fn from_report(report: &EvalReport, params: BTreeMap<String, serde_json::Value>) -> Self {
        RunSummary {
            method: report.method.clone(),
            sigma_e: report.sigma_e,
            seed: report.seed,
            n: report.n,
            mean_lcc: report.mean_lcc,
            std_lcc: report.std_lcc,
            standard_error: report.standard_error,
            params,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Write a file, creating parent directories as needed.
pub fn write_output(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fast_params() -> ModelParams {
        ModelParams { t_end: 10, ..Default::default() }.with_sigma_e(5.0)
    }

    #[test]
    fn zero_cost_world_reports_zero() {
        let params = ModelParams {
            cost_action: [0.0; 4],
            cost_failure: 0.0,
            ..fast_params()
        };
        let mut policy = AlwaysPolicy(Action::DoNothing);
        let report = evaluate(&mut policy, "a0", &params, 200, 1);
        assert_eq!(report.mean_lcc, 0.0);
        assert_eq!(report.std_lcc, 0.0);
    }

    #[test]
    fn benchmark_with_free_failures_is_the_geometric_sum() {
        let params = ModelParams { cost_failure: 0.0, ..ModelParams::default() };
        let mut policy = benchmark_a1_policy();
        let report = evaluate(&mut policy, "benchmark-a1", &params, 50, 2);
        let analytic: f64 = (1..20).map(|t| params.gamma.powi(t)).sum();
        assert_abs_diff_eq!(report.mean_lcc, analytic, epsilon = 1e-10);
        assert_abs_diff_eq!(analytic, 15.56, epsilon = 0.03);
        assert_eq!(report.std_lcc, 0.0);
        // Every decision is a1.
        for row in action_statistics(&report) {
            assert_eq!(row[Action::ReduceRate.index()], 1.0);
        }
    }

    #[test]
    fn benchmark_mean_dominates_the_pure_action_cost() {
        let params = ModelParams::default().with_sigma_e(50.0);
        let mut policy = benchmark_a1_policy();
        let report = evaluate(&mut policy, "benchmark-a1", &params, 2000, 3);
        let floor: f64 = (1..20).map(|t| params.gamma.powi(t)).sum();
        assert!(report.mean_lcc.is_finite());
        assert!(report.mean_lcc >= floor);
    }

    #[test]
    fn reports_are_bit_identical_across_repeats_and_sigma_for_the_benchmark() {
        let base = fast_params();
        let mut policy = benchmark_a1_policy();
        let a = evaluate(&mut policy, "b", &base.with_sigma_e(0.5), 300, 7);
        let b = evaluate(&mut policy, "b", &base.with_sigma_e(0.5), 300, 7);
        assert_eq!(a, b);
        let c = evaluate(&mut policy, "b", &base.with_sigma_e(500.0), 300, 7);
        assert_eq!(a.lccs, c.lccs);
    }

    #[test]
    fn action_frequencies_sum_to_one() {
        let params = fast_params();
        let mut policy = UniformRandomPolicy;
        let report = evaluate(&mut policy, "random", &params, 500, 4);
        for row in &report.action_freq {
            let total: f64 = row.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert_abs_diff_eq!(
            report.standard_error,
            report.std_lcc / (report.n as f64).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn belief_tracking_has_one_record_per_epoch() {
        let params = fast_params();
        let mut policy = benchmark_a1_policy();
        let records = belief_trajectories(&mut policy, &params, 5, 5);
        assert_eq!(records.len(), 5 * (params.t_end - 1));
        // Reproducible under the same seed.
        let again = belief_trajectories(&mut policy, &params, 5, 5);
        assert_eq!(records, again);
    }

    #[test]
    fn noiseless_belief_tracking_matches_the_true_level() {
        let params = fast_params().with_sigma_e(0.0);
        let mut policy = AlwaysPolicy(Action::DoNothing);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let traj = env::simulate_trajectory(&mut policy, &params, &mut rng);
        let schedule = precompute_schedule(&params);
        let mut filter = BeliefFilter::new(params, schedule);
        for t in 1..params.t_end {
            let b = filter.advance(traj.actions[t - 1], traj.observation(t));
            assert_abs_diff_eq!(b.mu_d, traj.states[t].d, epsilon = 1e-9);
        }
    }

    #[test]
    fn vi_snapshot_is_a0_at_the_endgame_without_failure_cost() {
        let params = ModelParams { cost_failure: 0.0, t_end: 6, ..Default::default() };
        let grid = BeliefGrid::new(6, 4, (-159.36, 26.67), (-0.6, 9.4)).unwrap();
        let solution = vi::solve(grid.clone(), &params, false).unwrap();
        let cells = policy_grid_snapshot(&SnapshotSource::Vi(&solution), params.t_end - 1, &grid).unwrap();
        assert_eq!(cells.len(), grid.n_cells());
        assert!(cells.iter().all(|(_, a)| *a == Action::DoNothing));
    }

    #[test]
    fn single_cell_snapshot_has_one_entry() {
        let params = ModelParams { t_end: 6, ..Default::default() }.with_sigma_e(0.5);
        let grid = BeliefGrid::new(1, 1, (-10.0, 10.0), (0.0, 8.0)).unwrap();
        let source = SnapshotSource::Mcts {
            mcts: MctsParams { n_tree: 50, n_rollout: 1, ..Default::default() },
            params,
            seed: 0,
        };
        let cells = policy_grid_snapshot(&source, 3, &grid).unwrap();
        assert_eq!(cells.len(), 1);
    }

    #[test]
    fn csv_round_trips_exactly() {
        let params = fast_params();
        let mut policy = UniformRandomPolicy;
        let report = evaluate(&mut policy, "random", &params, 120, 9);

        let lccs = parse_lcc_csv(&lcc_csv(&report.lccs)).unwrap();
        assert_eq!(lccs, report.lccs);

        let stats = parse_action_stats_csv(&action_stats_csv(&report)).unwrap();
        assert_eq!(stats, report.action_freq);

        let rows = vec![
            SweepRow {
                method: "vi".into(),
                sigma_e: 0.5,
                mean: report.mean_lcc,
                std: report.std_lcc,
                se: report.standard_error,
                n: report.n,
            },
            SweepRow {
                method: "benchmark-a1".into(),
                sigma_e: 5000.0,
                mean: 17.25,
                std: 3.5,
                se: 0.035,
                n: 10_000,
            },
        ];
        assert_eq!(parse_sweep_csv(&sweep_csv(&rows)).unwrap(), rows);
    }

    #[test]
    fn sweep_runs_cheap_methods_end_to_end() {
        let mut spec = SweepSpec::new(fast_params());
        spec.methods = vec![Method::BenchmarkA1, Method::Random];
        spec.sigmas = vec![0.5, 50.0];
        spec.n_baseline = 100;
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.std >= 0.0));
        // Missing rqn artifacts must error, not silently skip.
        spec.methods = vec![Method::Rqn];
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn run_summary_serializes() {
        let params = fast_params();
        let mut policy = benchmark_a1_policy();
        let report = evaluate(&mut policy, "benchmark-a1", &params, 10, 11);
        let mut echo = BTreeMap::new();
        echo.insert("t_end".to_string(), serde_json::json!(params.t_end));
        let summary = RunSummary::from_report(&report, echo);
        let json = summary.to_json();
        let back: RunSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.mean_lcc, report.mean_lcc);
        assert_eq!(back.method, "benchmark-a1");
    }
}
