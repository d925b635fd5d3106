//! Reference solution: backward-induction value iteration on a discretized
//! belief grid.
//!
//! The belief means `(mu''_D, mu''_K)` live on a rectangular grid whose
//! cell midpoints represent each cell; out-of-range values are absorbed by
//! the boundary cells. Belief transitions are computed analytically from
//! the one-dimensional Gaussian law of the next `mu''_D` (module
//! [`crate::belief`]): the probability of landing in a destination column
//! is a CDF difference over that column's interval, and the matching
//! `mu''_K` is the deterministic linear image of the column midpoint.
//! Using exact CDFs instead of sampled transition tables keeps the action
//! bands in the policy free of sampling artifacts.
//!
//! Backward induction then solves
//!
//! ```text
//! V_t(b)     = min_a [ C(b,a) + gamma * sum_b' P(b'|b,a) V_{t+1}(b') ]
//! V_t_end(b) = expected terminal failure cost
//! ```
//!
//! with `C(b,a) = c_a + c_F * P(D_t > d_cr | b)` evaluated at the cell
//! midpoint with the posterior level std of the schedule.

use rand_chacha::ChaCha8Rng;

use crate::belief::{belief_transition_law, BeliefFilter, BeliefMean, CovarianceSchedule};
use crate::env::{Action, ModelParams, Policy};
use crate::gauss;
use crate::{Error, Result};

/// Rectangular discretization of the belief-mean plane.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefGrid {
    pub n_d: usize,
    pub n_k: usize,
    pub bounds_d: (f64, f64),
    pub bounds_k: (f64, f64),
}

impl Default for BeliefGrid {
    /// 60x20 grid; the `mu_D` axis reuses the observation floor/ceiling
    /// bounds of the tree search, the `mu_K` axis covers the reachable
    /// rate band `[mu_k0 - t_end*delta_k - 3 sigma_k0, mu_k0 + 3 sigma_k0]`
    /// for the default parameters.
    fn default() -> Self {
        Self { n_d: 60, n_k: 20, bounds_d: (-159.36, 26.67), bounds_k: (-0.6, 9.4) }
    }
}

impl BeliefGrid {
    pub fn new(n_d: usize, n_k: usize, bounds_d: (f64, f64), bounds_k: (f64, f64)) -> Result<Self> {
        if n_d == 0 || n_k == 0 || bounds_d.0 >= bounds_d.1 || bounds_k.0 >= bounds_k.1 {
            return Err(Error::Config("belief grid must have positive extent".into()));
        }
        Ok(Self { n_d, n_k, bounds_d, bounds_k })
    }

    pub fn n_cells(&self) -> usize {
        self.n_d * self.n_k
    }

    pub fn cell_width_d(&self) -> f64 {
        (self.bounds_d.1 - self.bounds_d.0) / self.n_d as f64
    }

    pub fn cell_width_k(&self) -> f64 {
        (self.bounds_k.1 - self.bounds_k.0) / self.n_k as f64
    }

    /// Column index along the `mu_D` axis, clamped to the boundary cells.
    pub fn d_index(&self, mu_d: f64) -> usize {
        let idx = ((mu_d - self.bounds_d.0) / self.cell_width_d()).floor();
        (idx.max(0.0) as usize).min(self.n_d - 1)
    }

    /// Row index along the `mu_K` axis, clamped to the boundary cells.
    pub fn k_index(&self, mu_k: f64) -> usize {
        let idx = ((mu_k - self.bounds_k.0) / self.cell_width_k()).floor();
        (idx.max(0.0) as usize).min(self.n_k - 1)
    }

    pub fn cell_index(&self, mu_d: f64, mu_k: f64) -> usize {
        self.d_index(mu_d) * self.n_k + self.k_index(mu_k)
    }

    pub fn cell_of(&self, cell: usize) -> (usize, usize) {
        (cell / self.n_k, cell % self.n_k)
    }

    pub fn d_mid(&self, d_idx: usize) -> f64 {
        self.bounds_d.0 + (d_idx as f64 + 0.5) * self.cell_width_d()
    }

    pub fn k_mid(&self, k_idx: usize) -> f64 {
        self.bounds_k.0 + (k_idx as f64 + 0.5) * self.cell_width_k()
    }

    /// Midpoint of a flat cell index.
    pub fn midpoint(&self, cell: usize) -> (f64, f64) {
        let (di, ki) = self.cell_of(cell);
        (self.d_mid(di), self.k_mid(ki))
    }

    /// Left edge of column `d_idx` (used for CDF differences).
    fn d_edge(&self, d_idx: usize) -> f64 {
        self.bounds_d.0 + d_idx as f64 * self.cell_width_d()
    }
}

/// Sparse transition row: destination cells and probabilities.
pub type TransitionRow = Vec<(u32, f64)>;

/// Analytic belief transition tables.
///
/// `row(t, a, cell)` is the distribution over cells at `t+1` after taking
/// `a` in `cell` at `t`, for `t = 1..=t_end-1`.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    /// `steps[t-1][action][cell]` — transition from `t` to `t+1`.
    steps: Vec<[Vec<TransitionRow>; 4]>,
}

impl TransitionTable {
    pub fn row(&self, t: usize, action: Action, cell: usize) -> &TransitionRow {
        &self.steps[t - 1][action.index()][cell]
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }
}

/// Distribution over destination cells at time `t_next` for an arbitrary
/// source belief (not necessarily a midpoint).
///
/// `split_k_mass` splits each column's probability between the two `mu_K`
/// rows adjacent to the linear image instead of snapping to the nearest
/// row. Snapping quantizes the slowly-moving rate coordinate (row height
/// 0.5 vs per-step rate innovations of ~0.02), which systematically
/// biases multi-step value predictions; interpolation keeps the expected
/// rate exact at first order.
pub fn transition_row_from(
    belief: &BeliefMean,
    action: Action,
    t_next: usize,
    grid: &BeliefGrid,
    schedule: &CovarianceSchedule,
    params: &ModelParams,
    split_k_mass: bool,
) -> TransitionRow {
    let law = belief_transition_law(belief, action, schedule, t_next, params);
    let mut row: TransitionRow = Vec::with_capacity(grid.n_d + 4);
    if law.std_mu_d < 1e-12 {
        // Degenerate law: all mass on the cell containing the prior means.
        let d_idx = grid.d_index(law.mu_d_prior);
        push_k_mass(&mut row, grid, d_idx, law.mu_k_for(grid.d_mid(d_idx)), 1.0, split_k_mass);
        return row;
    }
    let mut cdf_left = 0.0; // CDF mass strictly below the current column
    for d_idx in 0..grid.n_d {
        let cdf_right = if d_idx + 1 == grid.n_d {
            1.0
        } else {
            gauss::cdf((grid.d_edge(d_idx + 1) - law.mu_d_prior) / law.std_mu_d)
        };
        let p = cdf_right - cdf_left;
        cdf_left = cdf_right;
        if p <= 0.0 {
            continue;
        }
        let mu_k = law.mu_k_for(grid.d_mid(d_idx));
        push_k_mass(&mut row, grid, d_idx, mu_k, p, split_k_mass);
    }
    row
}

fn push_k_mass(
    row: &mut TransitionRow,
    grid: &BeliefGrid,
    d_idx: usize,
    mu_k: f64,
    p: f64,
    split: bool,
) {
    if !split {
        add_mass(row, (d_idx * grid.n_k + grid.k_index(mu_k)) as u32, p);
        return;
    }
    // Linear interpolation between the two rows whose midpoints bracket mu_k.
    let w = grid.cell_width_k();
    let pos = (mu_k - grid.bounds_k.0) / w - 0.5;
    let lower = pos.floor();
    let frac = pos - lower;
    let lo = (lower.max(0.0) as usize).min(grid.n_k - 1);
    let hi = ((lower + 1.0).max(0.0) as usize).min(grid.n_k - 1);
    add_mass(row, (d_idx * grid.n_k + lo) as u32, p * (1.0 - frac));
    add_mass(row, (d_idx * grid.n_k + hi) as u32, p * frac);
}

fn add_mass(row: &mut TransitionRow, dest: u32, p: f64) {
    if p <= 0.0 {
        return;
    }
    if let Some(entry) = row.iter_mut().find(|(c, _)| *c == dest) {
        entry.1 += p;
    } else {
        row.push((dest, p));
    }
}

/// Build the transition tables for every `(t, action, source cell)`.
pub fn build_transition_tables(
    grid: &BeliefGrid,
    schedule: &CovarianceSchedule,
    params: &ModelParams,
    split_k_mass: bool,
) -> Result<TransitionTable> {
    if grid.cell_width_d() <= 0.0 || grid.cell_width_k() <= 0.0 {
        return Err(Error::Config("degenerate belief grid".into()));
    }
    let mut steps = Vec::with_capacity(params.t_end - 1);
    for t in 1..params.t_end {
        let mut per_action: [Vec<TransitionRow>; 4] = Default::default();
        for action in Action::ALL {
            let rows: Vec<TransitionRow> = (0..grid.n_cells())
                .map(|cell| {
                    let (mu_d, mu_k) = grid.midpoint(cell);
                    let belief = BeliefMean { mu_d, mu_k, t };
                    transition_row_from(&belief, action, t + 1, grid, schedule, params, split_k_mass)
                })
                .collect();
            per_action[action.index()] = rows;
        }
        steps.push(per_action);
    }
    Ok(TransitionTable { steps })
}

/// Expected immediate cost of `action` in a cell at time `t`:
/// `c_a + c_F * P(D_t > d_cr)` under the midpoint belief.
pub fn expected_immediate_cost(
    cell: usize,
    action: Action,
    grid: &BeliefGrid,
    schedule: &CovarianceSchedule,
    t: usize,
    params: &ModelParams,
) -> f64 {
    let (mu_d, _) = grid.midpoint(cell);
    params.cost_action[action.index()] + expected_failure_cost(mu_d, schedule, t, params)
}

fn expected_failure_cost(mu_d: f64, schedule: &CovarianceSchedule, t: usize, params: &ModelParams) -> f64 {
    params.cost_failure * gauss::exceed_prob(params.d_cr, mu_d, schedule.entry(t).sigma_d_post)
}

/// Value and policy tables from backward induction.
#[derive(Debug, Clone)]
pub struct ValuePolicyTables {
    /// `v[t-1][cell]` for `t = 1..=t_end`.
    values: Vec<Vec<f64>>,
    /// `policy[t-1][cell]` for `t = 1..=t_end-1`.
    policy: Vec<Vec<Action>>,
    t_end: usize,
}

impl ValuePolicyTables {
    pub fn value(&self, t: usize, cell: usize) -> f64 {
        self.values[t - 1][cell]
    }

    pub fn action(&self, t: usize, cell: usize) -> Action {
        self.policy[t - 1][cell]
    }

    pub fn t_end(&self) -> usize {
        self.t_end
    }
}

/// Solve the discretized belief MDP by backward induction.
///
/// Ties in the minimization break toward the lower action index, so
/// policies are reproducible.
pub fn backward_induction(
    grid: &BeliefGrid,
    tables: &TransitionTable,
    schedule: &CovarianceSchedule,
    params: &ModelParams,
) -> ValuePolicyTables {
    let t_end = params.t_end;
    let n = grid.n_cells();
    let mut values = vec![Vec::new(); t_end];
    let mut policy = vec![Vec::new(); t_end - 1];

    // Terminal step: expected failure cost only.
    values[t_end - 1] = (0..n)
        .map(|cell| expected_failure_cost(grid.midpoint(cell).0, schedule, t_end, params))
        .collect();

    for t in (1..t_end).rev() {
        let next = std::mem::take(&mut values[t]); // V_{t+1}
        let mut v_t = Vec::with_capacity(n);
        let mut pi_t = Vec::with_capacity(n);
        for cell in 0..n {
            let mut best = f64::INFINITY;
            let mut best_action = Action::DoNothing;
            for action in Action::ALL {
                let immediate = expected_immediate_cost(cell, action, grid, schedule, t, params);
                let continuation: f64 = tables
                    .row(t, action, cell)
                    .iter()
                    .map(|&(dest, p)| p * next[dest as usize])
                    .sum();
                let q = immediate + params.gamma * continuation;
                if q < best {
                    best = q;
                    best_action = action;
                }
            }
            v_t.push(best);
            pi_t.push(best_action);
        }
        values[t] = next;
        values[t - 1] = v_t;
        policy[t - 1] = pi_t;
    }

    ValuePolicyTables { values, policy, t_end }
}

/// Everything the extracted grid policy needs at run time.
#[derive(Debug, Clone)]
pub struct ViSolution {
    pub grid: BeliefGrid,
    pub tables: ValuePolicyTables,
    pub schedule: CovarianceSchedule,
    pub params: ModelParams,
    pub split_k_mass: bool,
}

/// Solve the full pipeline: schedule, transition tables, induction.
pub fn solve(
    grid: BeliefGrid,
    params: &ModelParams,
    split_k_mass: bool,
) -> Result<ViSolution> {
    let schedule = crate::belief::precompute_schedule(params);
    let transitions = build_transition_tables(&grid, &schedule, params, split_k_mass)?;
    let tables = backward_induction(&grid, &transitions, &schedule, params);
    Ok(ViSolution { grid, tables, schedule, params: *params, split_k_mass })
}

impl ViSolution {
    /// Action at an arbitrary belief point (boundary cells absorb
    /// out-of-range beliefs). Valid for `t = 1..=t_end-1`.
    pub fn action_at(&self, t: usize, mu_d: f64, mu_k: f64) -> Result<Action> {
        if t == 0 || t >= self.params.t_end {
            return Err(Error::Config(format!("no decision at t = {t}")));
        }
        Ok(self.tables.action(t, self.grid.cell_index(mu_d, mu_k)))
    }

    /// Model-predicted expected LCC of the grid policy: the `t = 0` failure
    /// term plus the discounted average of `V_1` over the initial belief
    /// transition (forced `a0`, first observation marginalized).
    pub fn predicted_mean_lcc(&self) -> f64 {
        let p = &self.params;
        let initial = BeliefMean { mu_d: p.mu_d0, mu_k: p.mu_k0, t: 0 };
        let row = transition_row_from(
            &initial,
            Action::DoNothing,
            1,
            &self.grid,
            &self.schedule,
            p,
            self.split_k_mass,
        );
        let v1: f64 = row
            .iter()
            .map(|&(dest, prob)| prob * self.tables.value(1, dest as usize))
            .sum();
        let t0_failure = p.cost_failure * gauss::exceed_prob(p.d_cr, p.mu_d0, p.sigma_d0);
        t0_failure + p.gamma * v1
    }

    /// Wrap the solution as an online policy with its own belief filter.
    pub fn policy(&self) -> ViPolicy {
        ViPolicy {
            solution: self.clone(),
            filter: BeliefFilter::new(self.params, self.schedule.clone()),
            last_action: Action::DoNothing,
        }
    }

    /// CSV dump of the value table: `t,cell_d,cell_k,v,action` (the
    /// terminal row has an empty action column).
    pub fn value_table_csv(&self) -> String {
        let mut out = String::from("t,cell_d,cell_k,v,action\n");
        for t in 1..=self.params.t_end {
            for cell in 0..self.grid.n_cells() {
                let (di, ki) = self.grid.cell_of(cell);
                let action = if t < self.params.t_end {
                    self.tables.action(t, cell).label()
                } else {
                    ""
                };
                out.push_str(&format!("{},{},{},{},{}\n", t, di, ki, self.tables.value(t, cell), action));
            }
        }
        out
    }
}

/// Grid-policy lookup with online belief tracking.
pub struct ViPolicy {
    solution: ViSolution,
    filter: BeliefFilter,
    last_action: Action,
}

impl Policy for ViPolicy {
    fn reset(&mut self) {
        self.filter.reset();
        self.last_action = Action::DoNothing;
    }

    fn act(&mut self, t: usize, obs: f64, _rng: &mut ChaCha8Rng) -> Action {
        let belief = self.filter.advance(self.last_action, obs);
        debug_assert_eq!(belief.t, t);
        let action = self
            .solution
            .action_at(t, belief.mu_d, belief.mu_k)
            .expect("decision epochs run 1..t_end-1");
        self.last_action = action;
        action
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::precompute_schedule;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn small_grid() -> BeliefGrid {
        BeliefGrid::new(6, 4, (-159.36, 26.67), (-0.6, 9.4)).unwrap()
    }

    #[test]
    fn indexing_clamps_to_boundary_cells() {
        let g = BeliefGrid::default();
        assert_eq!(g.d_index(-1e9), 0);
        assert_eq!(g.d_index(1e9), 59);
        assert_eq!(g.k_index(-1e9), 0);
        assert_eq!(g.k_index(1e9), 19);
        let (d, k) = g.midpoint(g.cell_index(-100.0, 6.0));
        assert!((d - -100.0).abs() <= g.cell_width_d() / 2.0 + 1e-12);
        assert!((k - 6.0).abs() <= g.cell_width_k() / 2.0 + 1e-12);
    }

    #[test]
    fn rows_are_stochastic() {
        let params = ModelParams { t_end: 6, ..Default::default() }.with_sigma_e(50.0);
        let schedule = precompute_schedule(&params);
        let grid = small_grid();
        for split in [false, true] {
            let tables = build_transition_tables(&grid, &schedule, &params, split).unwrap();
            for t in 1..params.t_end {
                for action in Action::ALL {
                    for cell in 0..grid.n_cells() {
                        let total: f64 =
                            tables.row(t, action, cell).iter().map(|(_, p)| p).sum();
                        assert!((total - 1.0).abs() < 1e-9, "t={t} a={action} cell={cell}");
                    }
                }
            }
        }
    }

    #[test]
    fn quasi_deterministic_transition_concentrates() {
        // Uninformative observations: the next belief means are (almost)
        // exactly the prior means.
        let params = ModelParams::default().with_sigma_e(1e6);
        let schedule = precompute_schedule(&params);
        let grid = BeliefGrid::default();
        let (mu_d, mu_k) = grid.midpoint(grid.cell_index(-100.0, 6.0));
        let belief = BeliefMean { mu_d, mu_k, t: 1 };
        let row = transition_row_from(
            &belief,
            Action::DoNothing,
            2,
            &grid,
            &schedule,
            &params,
            false,
        );
        let expect = grid.cell_index(mu_d + mu_k, mu_k) as u32;
        let mass: f64 = row.iter().filter(|(c, _)| *c == expect).map(|(_, p)| p).sum();
        assert!(mass >= 0.999, "mass on the prior-mean cell = {mass}");
    }

    #[test]
    fn transition_row_matches_mc_bucketing_oracle() {
        // Simulate o_1, update the belief, bucket the result; compare the
        // analytic row within 3 binomial standard errors per cell.
        let params = ModelParams::default().with_sigma_e(50.0);
        let schedule = precompute_schedule(&params);
        let grid = BeliefGrid::default();
        let (mu_d, mu_k) = grid.midpoint(grid.cell_index(-120.0, 6.2));
        let belief = BeliefMean { mu_d, mu_k, t: 0 };
        let action = Action::DoNothing;
        let row = transition_row_from(&belief, action, 1, &grid, &schedule, &params, false);

        let n = 1_000_000usize;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut counts = vec![0u32; grid.n_cells()];
        let law = crate::belief::belief_transition_law(&belief, action, &schedule, 1, &params);
        let e = schedule.entry(1);
        let obs_std = (params.sigma_e * params.sigma_e
            + e.sigma_d_prior * e.sigma_d_prior)
            .sqrt();
        for _ in 0..n {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            let o = law.mu_d_prior + obs_std * z;
            let post = crate::belief::posterior_mean((law.mu_d_prior, law.mu_k_prior), o, &schedule, 1);
            counts[grid.cell_index(post.mu_d, post.mu_k)] += 1;
        }
        let mut analytic = vec![0.0; grid.n_cells()];
        for (cell, p) in &row {
            analytic[*cell as usize] += p;
        }
        for cell in 0..grid.n_cells() {
            let p = analytic[cell];
            let freq = counts[cell] as f64 / n as f64;
            let se = (p.max(1e-12) * (1.0 - p) / n as f64).sqrt();
            assert!(
                (freq - p).abs() <= 3.0 * se + 1e-9,
                "cell {cell}: analytic {p}, mc {freq}"
            );
        }
    }

    #[test]
    fn immediate_cost_examples() {
        let params = ModelParams::default().with_sigma_e(50.0);
        let schedule = precompute_schedule(&params);
        let grid = BeliefGrid::default();
        // Far below the threshold: failure term vanishes.
        let safe = grid.cell_index(-150.0, 0.0);
        let c = expected_immediate_cost(safe, Action::DoNothing, &grid, &schedule, 3, &params);
        assert!(c < 1e-8, "cost = {c}");
        let c2 = expected_immediate_cost(safe, Action::ImproveState, &grid, &schedule, 3, &params);
        assert_abs_diff_eq!(c2 - c, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn immediate_cost_at_the_threshold_is_half_the_failure_cost() {
        // Single-cell grid whose midpoint lands exactly on d_cr = 0.
        let params = ModelParams::default().with_sigma_e(50.0);
        let schedule = precompute_schedule(&params);
        let grid = BeliefGrid::new(1, 1, (-1.0, 1.0), (0.0, 1.0)).unwrap();
        let c = expected_immediate_cost(0, Action::DoNothing, &grid, &schedule, 4, &params);
        assert_abs_diff_eq!(c, 75.0, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_cdf_failure_arithmetic() {
        // mu_d = 10, sigma = 5, d_cr = 0: failure probability is Phi(2).
        let p = gauss::exceed_prob(0.0, 10.0, 5.0);
        assert_abs_diff_eq!(150.0 * p, 146.5874802, epsilon = 1e-4);
    }

    #[test]
    fn endgame_without_failure_cost_prefers_doing_nothing() {
        let params = ModelParams { cost_failure: 0.0, t_end: 6, ..Default::default() };
        let solution = solve(small_grid(), &params, false).unwrap();
        for cell in 0..solution.grid.n_cells() {
            assert_eq!(solution.tables.action(params.t_end - 1, cell), Action::DoNothing);
        }
        // And all values are nonnegative everywhere.
        for t in 1..=params.t_end {
            for cell in 0..solution.grid.n_cells() {
                assert!(solution.tables.value(t, cell) >= 0.0);
            }
        }
    }

    #[test]
    fn backward_induction_matches_exhaustive_enumeration() {
        // Tiny instance; the oracle recurses over the explicit decision
        // tree with the same exact transition matrices.
        let params = ModelParams { t_end: 3, ..Default::default() }.with_sigma_e(50.0);
        let schedule = precompute_schedule(&params);
        let grid = small_grid();
        let tables = build_transition_tables(&grid, &schedule, &params, false).unwrap();
        let vp = backward_induction(&grid, &tables, &schedule, &params);

        fn enumerate(
            cell: usize,
            t: usize,
            grid: &BeliefGrid,
            tables: &TransitionTable,
            schedule: &CovarianceSchedule,
            params: &ModelParams,
        ) -> f64 {
            if t == params.t_end {
                return params.cost_failure
                    * gauss::exceed_prob(
                        params.d_cr,
                        grid.midpoint(cell).0,
                        schedule.entry(t).sigma_d_post,
                    );
            }
            Action::ALL
                .iter()
                .map(|&a| {
                    let immediate = expected_immediate_cost(cell, a, grid, schedule, t, params);
                    let cont: f64 = tables
                        .row(t, a, cell)
                        .iter()
                        .map(|&(dest, p)| {
                            p * enumerate(dest as usize, t + 1, grid, tables, schedule, params)
                        })
                        .sum();
                    immediate + params.gamma * cont
                })
                .fold(f64::INFINITY, f64::min)
        }

        for cell in 0..grid.n_cells() {
            let oracle = enumerate(cell, 1, &grid, &tables, &schedule, &params);
            assert_abs_diff_eq!(vp.value(1, cell), oracle, epsilon = 1e-10);
        }
    }

    #[test]
    fn constant_cost_shift_moves_values_not_argmins() {
        let params = ModelParams { t_end: 6, ..Default::default() }.with_sigma_e(50.0);
        let shifted = ModelParams {
            cost_action: [10.0, 11.0, 15.0, 110.0],
            ..params
        };
        let a = solve(small_grid(), &params, false).unwrap();
        let b = solve(small_grid(), &shifted, false).unwrap();
        // Discounted remaining-step count sum_{tau=t}^{t_end-1} gamma^(tau-t).
        for t in 1..params.t_end {
            let remaining: f64 = (0..params.t_end - t).map(|i| params.gamma.powi(i as i32)).sum();
            for cell in 0..a.grid.n_cells() {
                assert_abs_diff_eq!(
                    b.tables.value(t, cell) - a.tables.value(t, cell),
                    10.0 * remaining,
                    epsilon = 1e-8
                );
                assert_eq!(b.tables.action(t, cell), a.tables.action(t, cell));
            }
        }
    }

    #[test]
    fn shorter_horizons_cost_less() {
        let grid = small_grid();
        let long = ModelParams { t_end: 8, ..Default::default() }.with_sigma_e(50.0);
        let short = ModelParams { t_end: 6, ..Default::default() }.with_sigma_e(50.0);
        let a = solve(grid.clone(), &long, false).unwrap();
        let b = solve(grid, &short, false).unwrap();
        // With trailing steps removed, the same (t, cell) can only get cheaper.
        for t in 1..short.t_end {
            for cell in 0..a.grid.n_cells() {
                assert!(b.tables.value(t, cell) <= a.tables.value(t, cell) + 1e-9);
            }
        }
    }

    #[test]
    fn policy_rejects_out_of_range_timesteps() {
        let params = ModelParams { t_end: 4, ..Default::default() };
        let solution = solve(small_grid(), &params, false).unwrap();
        assert!(solution.action_at(0, -100.0, 6.0).is_err());
        assert!(solution.action_at(4, -100.0, 6.0).is_err());
        assert!(solution.action_at(3, -100.0, 6.0).is_ok());
        // Beliefs outside the grid land in boundary cells rather than erroring.
        assert!(solution.action_at(1, -1e6, 1e6).is_ok());
    }

    #[test]
    fn value_table_csv_shape() {
        let params = ModelParams { t_end: 3, ..Default::default() };
        let solution = solve(small_grid(), &params, false).unwrap();
        let csv = solution.value_table_csv();
        assert_eq!(csv.lines().count(), 1 + 3 * solution.grid.n_cells());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Row stochasticity holds for arbitrary source beliefs, actions,
        /// timesteps, and both K-assignment modes.
        #[test]
        fn arbitrary_rows_sum_to_one(
            mu_d in -200.0f64..60.0,
            mu_k in -2.0f64..10.0,
            a_idx in 0usize..4,
            t in 1usize..=19,
            sigma_e in prop::sample::select(vec![0.5, 5.0, 50.0, 500.0]),
            split in proptest::bool::ANY,
        ) {
            let params = ModelParams::default().with_sigma_e(sigma_e);
            let schedule = precompute_schedule(&params);
            let grid = BeliefGrid::default();
            let belief = BeliefMean { mu_d, mu_k, t };
            let row = transition_row_from(
                &belief,
                Action::from_index(a_idx).unwrap(),
                t + 1,
                &grid,
                &schedule,
                &params,
                split,
            );
            let total: f64 = row.iter().map(|(_, p)| p).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            for (cell, _) in row {
                prop_assert!((cell as usize) < grid.n_cells());
            }
        }
    }
}
