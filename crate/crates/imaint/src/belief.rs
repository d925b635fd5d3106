//! Closed-form Gaussian belief propagation.
//!
//! Linearity keeps the joint distribution of `(D_t, K_t)` bivariate normal
//! after every action and observation, so the belief is fully described by
//! two posterior means plus a covariance that is the same for every
//! observation-action history. The covariance part — prior/posterior
//! standard deviations and correlation per timestep — is precomputed once
//! into a [`CovarianceSchedule`]; only the means move at run time.
//!
//! Writing `'` for prior (after the action, before the observation) and
//! `''` for posterior quantities, the schedule recursion is
//!
//! ```text
//! sigma'_D,t  = sqrt(sigma''_K^2 + sigma''_D^2 + 2 rho'' sigma''_K sigma''_D)   (at t-1)
//! sigma''_D,t = sigma_e * sigma'_D,t / sqrt(sigma_e^2 + sigma'_D,t^2)
//! sigma'_K,t  = sigma''_K,t-1
//! sigma''_K,t = sigma'_K,t * sqrt(sigma_e^2 + sigma'_D,t^2 (1 - rho'_t^2))
//!                          / sqrt(sigma_e^2 + sigma'_D,t^2)
//! rho'_t      = (rho''_{t-1} sigma''_D,t-1 + sigma''_K,t-1) / sigma'_D,t
//! rho''_t     = rho'_t * sigma_e / sqrt(sigma_e^2 + sigma'_D,t^2 (1 - rho'_t^2))
//! ```
//!
//! and the observation-dependent mean updates are the conjugate-normal
//!
//! ```text
//! mu''_D,t = (sigma'_D^2 o_t + sigma_e^2 mu'_D) / (sigma_e^2 + sigma'_D^2)
//! mu''_K,t = rho'_t sigma'_D sigma'_K / (sigma_e^2 + sigma'_D^2) * (o_t - mu'_D) + mu'_K
//! ```
//!
//! (the first line is the usual product-of-precisions form, written so it
//! stays valid at `sigma_e = 0`, where the observation is exact).

use rand::Rng;
use rand_distr::StandardNormal;

use crate::env::{Action, ModelParams, SystemState};
use crate::{Error, Result};

/// Prior and posterior belief covariance at one timestep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEntry {
    pub sigma_d_prior: f64,
    pub sigma_d_post: f64,
    pub sigma_k_prior: f64,
    pub sigma_k_post: f64,
    pub rho_prior: f64,
    pub rho_post: f64,
}

/// Deterministic covariance schedule for `t = 0..=t_end`.
///
/// Independent of observations and actions (replacement included: the
/// schedule is the paper-model's own simplification that only the means
/// reset on `a3`), so it is computed once per `sigma_e` and shared.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSchedule {
    entries: Vec<ScheduleEntry>,
    sigma_e: f64,
}

/// The moving part of the belief: posterior means at timestep `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefMean {
    pub mu_d: f64,
    pub mu_k: f64,
    pub t: usize,
}

/// Distribution of the next posterior means given a belief and an action.
///
/// The next `mu''_D` is normal; the next `mu''_K` is its deterministic
/// linear image, `mu''_K = k_slope * (mu''_D - mu_d_prior) + mu_k_prior`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefTransition {
    pub mu_d_prior: f64,
    pub mu_k_prior: f64,
    /// Standard deviation of the next posterior mean of `D`:
    /// `sigma'_D^2 / sqrt(sigma_e^2 + sigma'_D^2)`.
    pub std_mu_d: f64,
    pub k_slope: f64,
}

impl BeliefTransition {
    /// Posterior mean of `K` implied by a realized posterior mean of `D`.
    pub fn mu_k_for(&self, mu_d_post: f64) -> f64 {
        self.k_slope * (mu_d_post - self.mu_d_prior) + self.mu_k_prior
    }
}

/// Precompute the covariance schedule for all timesteps.
///
/// Entry 0 holds the initial distribution (posterior = prior, `rho = 0`);
/// the recursion above fills `1..=t_end`.
pub fn precompute_schedule(params: &ModelParams) -> CovarianceSchedule {
    let mut entries = Vec::with_capacity(params.t_end + 1);
    entries.push(ScheduleEntry {
        sigma_d_prior: params.sigma_d0,
        sigma_d_post: params.sigma_d0,
        sigma_k_prior: params.sigma_k0,
        sigma_k_post: params.sigma_k0,
        rho_prior: 0.0,
        rho_post: 0.0,
    });
    let se2 = params.sigma_e * params.sigma_e;
    for t in 1..=params.t_end {
        let prev = entries[t - 1];
        let (pd, pk, pr) = (prev.sigma_d_post, prev.sigma_k_post, prev.rho_post);
        let sigma_d_prior = (pk * pk + pd * pd + 2.0 * pr * pk * pd).max(0.0).sqrt();
        if sigma_d_prior == 0.0 {
            // The level is already fully determined (exact observations
            // exhaust the uncertainty); an observation carries no news.
            entries.push(ScheduleEntry {
                sigma_d_prior: 0.0,
                sigma_d_post: 0.0,
                sigma_k_prior: pk,
                sigma_k_post: pk,
                rho_prior: 0.0,
                rho_post: 0.0,
            });
            continue;
        }
        let rho_prior = ((pr * pd + pk) / sigma_d_prior).clamp(-1.0, 1.0);
        let sigma_k_prior = pk;
        let sp2 = sigma_d_prior * sigma_d_prior;
        let denom = (se2 + sp2).sqrt();
        let cross = (se2 + sp2 * (1.0 - rho_prior * rho_prior)).max(0.0).sqrt();
        let sigma_d_post = params.sigma_e * sigma_d_prior / denom;
        let sigma_k_post = sigma_k_prior * cross / denom;
        let rho_post = if cross == 0.0 { 0.0 } else { rho_prior * params.sigma_e / cross };
        entries.push(ScheduleEntry {
            sigma_d_prior,
            sigma_d_post,
            sigma_k_prior,
            sigma_k_post,
            rho_prior,
            rho_post,
        });
    }
    CovarianceSchedule { entries, sigma_e: params.sigma_e }
}

impl CovarianceSchedule {
    pub fn entry(&self, t: usize) -> &ScheduleEntry {
        &self.entries[t]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sigma_e(&self) -> f64 {
        self.sigma_e
    }

    /// Audit dump: `t,sigma_d_prior,sigma_d_post,sigma_k_prior,sigma_k_post,rho_prior,rho_post`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,sigma_d_prior,sigma_d_post,sigma_k_prior,sigma_k_post,rho_prior,rho_post\n");
        for (t, e) in self.entries.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                t, e.sigma_d_prior, e.sigma_d_post, e.sigma_k_prior, e.sigma_k_post, e.rho_prior, e.rho_post
            ));
        }
        out
    }
}

/// Effect of an action on the belief means: prior means at `t` from the
/// posterior means at `t-1`. Mirrors the state-level action table;
/// replacement resets to the fresh-component means.
pub fn prior_mean(belief: &BeliefMean, action: Action, params: &ModelParams) -> (f64, f64) {
    match action {
        Action::DoNothing => (belief.mu_d + belief.mu_k, belief.mu_k),
        Action::ReduceRate => (
            belief.mu_d + belief.mu_k - params.delta_k,
            belief.mu_k - params.delta_k,
        ),
        Action::ImproveState => (belief.mu_d + belief.mu_k - params.delta_d, belief.mu_k),
        Action::Replace => (params.mu_d0 + params.mu_k0, params.mu_k0),
    }
}

/// Condition the prior means at `t` on the observation `o_t`.
pub fn posterior_mean(
    prior: (f64, f64),
    obs: f64,
    schedule: &CovarianceSchedule,
    t: usize,
) -> BeliefMean {
    let e = schedule.entry(t);
    let se2 = schedule.sigma_e * schedule.sigma_e;
    let sp2 = e.sigma_d_prior * e.sigma_d_prior;
    let total = se2 + sp2;
    if total == 0.0 {
        // Exact observation of a fully determined level: nothing moves.
        return BeliefMean { mu_d: prior.0, mu_k: prior.1, t };
    }
    let mu_d = (sp2 * obs + se2 * prior.0) / total;
    let mu_k = e.rho_prior * e.sigma_d_prior * e.sigma_k_prior / total * (obs - prior.0) + prior.1;
    BeliefMean { mu_d, mu_k, t }
}

/// Distribution of the posterior means at `t` given the belief at `t-1`
/// and an action (marginalizing the not-yet-seen observation).
pub fn belief_transition_law(
    belief: &BeliefMean,
    action: Action,
    schedule: &CovarianceSchedule,
    t: usize,
    params: &ModelParams,
) -> BeliefTransition {
    let (mu_d_prior, mu_k_prior) = prior_mean(belief, action, params);
    let e = schedule.entry(t);
    let se2 = schedule.sigma_e * schedule.sigma_e;
    let sp2 = e.sigma_d_prior * e.sigma_d_prior;
    let total = se2 + sp2;
    let (std_mu_d, k_slope) = if e.sigma_d_prior == 0.0 {
        (0.0, 0.0)
    } else {
        (sp2 / total.sqrt(), e.rho_prior * e.sigma_k_prior / e.sigma_d_prior)
    };
    BeliefTransition { mu_d_prior, mu_k_prior, std_mu_d, k_slope }
}

/// Draw a ground-truth state from the posterior belief at `t`.
pub fn sample_state<R: Rng + ?Sized>(
    belief: &BeliefMean,
    schedule: &CovarianceSchedule,
    t: usize,
    rng: &mut R,
) -> Result<SystemState> {
    let e = schedule.entry(t);
    if e.rho_post.abs() > 1.0 {
        return Err(Error::Config(format!("corrupt schedule: |rho''_{t}| = {} > 1", e.rho_post)));
    }
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    // Cholesky factor of the 2x2 correlation matrix.
    let d = belief.mu_d + e.sigma_d_post * z1;
    let k = belief.mu_k
        + e.sigma_k_post * (e.rho_post * z1 + (1.0 - e.rho_post * e.rho_post).sqrt() * z2);
    Ok(SystemState { d, k })
}

/// Online belief tracker used by the grid, tree-search, and plotting code.
///
/// Starts at the initial means; [`BeliefFilter::advance`] applies the
/// action taken at `t-1` and conditions on the observation at `t`.
#[derive(Debug, Clone)]
pub struct BeliefFilter {
    params: ModelParams,
    schedule: CovarianceSchedule,
    current: BeliefMean,
}

impl BeliefFilter {
    pub fn new(params: ModelParams, schedule: CovarianceSchedule) -> Self {
        let current = BeliefMean { mu_d: params.mu_d0, mu_k: params.mu_k0, t: 0 };
        Self { params, schedule, current }
    }

    pub fn reset(&mut self) {
        self.current = BeliefMean { mu_d: self.params.mu_d0, mu_k: self.params.mu_k0, t: 0 };
    }

    pub fn current(&self) -> BeliefMean {
        self.current
    }

    pub fn schedule(&self) -> &CovarianceSchedule {
        &self.schedule
    }

    /// Advance one timestep: the action taken at `t-1` followed by the
    /// observation `o_t`. Returns the new posterior means.
    pub fn advance(&mut self, prev_action: Action, obs: f64) -> BeliefMean {
        let t = self.current.t + 1;
        let prior = prior_mean(&self.current, prev_action, &self.params);
        self.current = posterior_mean(prior, obs, &self.schedule, t);
        self.current
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn schedule_for(sigma_e: f64) -> (ModelParams, CovarianceSchedule) {
        let params = ModelParams::default().with_sigma_e(sigma_e);
        let schedule = precompute_schedule(&params);
        (params, schedule)
    }

    #[test]
    fn first_step_matches_hand_arithmetic() {
        let (_, s) = schedule_for(0.5);
        let e = s.entry(1);
        // sigma'_D,1 = sqrt(sigma_k0^2 + sigma_d0^2), rho''_0 = 0.
        let expect_prior = (1.0f64 + 20.85f64.powi(2)).sqrt();
        assert_abs_diff_eq!(e.sigma_d_prior, expect_prior, epsilon = 1e-12);
        assert_abs_diff_eq!(e.sigma_d_prior, 20.8740, epsilon = 5e-5);
        // sigma''_D,1 = sigma_e sigma' / sqrt(sigma_e^2 + sigma'^2); frozen
        // from the recursion evaluated by hand.
        let expect_post = 0.5 * expect_prior / (0.25 + expect_prior * expect_prior).sqrt();
        assert_abs_diff_eq!(e.sigma_d_post, expect_post, epsilon = 1e-12);
        assert_abs_diff_eq!(e.sigma_d_post, 0.499_856_6, epsilon = 1e-6);
    }

    #[test]
    fn schedule_is_finite_and_conditioning_reduces_variance() {
        for sigma_e in [0.0, 0.5, 50.0, 5000.0] {
            let (params, s) = schedule_for(sigma_e);
            assert_eq!(s.len(), params.t_end + 1);
            for t in 0..=params.t_end {
                let e = s.entry(t);
                assert!(e.sigma_d_post <= e.sigma_d_prior + 1e-12, "t={t} sigma_e={sigma_e}");
                assert!(e.rho_prior.abs() <= 1.0 && e.rho_post.abs() <= 1.0);
                assert!(e.sigma_d_prior.is_finite() && e.sigma_k_post.is_finite());
            }
        }
    }

    #[test]
    fn exact_observation_collapses_the_level_posterior() {
        let (_, s) = schedule_for(0.0);
        for t in 1..=20 {
            assert_eq!(s.entry(t).sigma_d_post, 0.0);
            assert_eq!(s.entry(t).rho_post, 0.0);
        }
    }

    #[test]
    fn uninformative_limit_leaves_the_prior() {
        // As sigma_e grows the posterior approaches the prior at every t.
        let (_, s) = schedule_for(1e9);
        for t in 1..=20 {
            let e = s.entry(t);
            assert_relative_eq!(e.sigma_d_post, e.sigma_d_prior, max_relative = 1e-6);
            assert_relative_eq!(e.sigma_k_post, e.sigma_k_prior, max_relative = 1e-6);
            if e.rho_prior.abs() > 1e-12 {
                assert_relative_eq!(e.rho_post, e.rho_prior, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn prior_mean_follows_the_action_table() {
        let params = ModelParams::default();
        let b = BeliefMean { mu_d: -126.24, mu_k: 6.4, t: 3 };
        let (d0, k0) = prior_mean(&b, Action::DoNothing, &params);
        assert_abs_diff_eq!(d0, -119.84, epsilon = 1e-12);
        assert_eq!(k0, 6.4);
        let (d1, k1) = prior_mean(&b, Action::ReduceRate, &params);
        assert_abs_diff_eq!(d1, -120.04, epsilon = 1e-12);
        assert_abs_diff_eq!(k1, 6.2, epsilon = 1e-12);
        let (d2, k2) = prior_mean(&b, Action::ImproveState, &params);
        assert_abs_diff_eq!(d2, -130.34, epsilon = 1e-12);
        assert_eq!(k2, 6.4);
        let (d3, k3) = prior_mean(&b, Action::Replace, &params);
        assert_abs_diff_eq!(d3, -126.24, epsilon = 1e-12);
        assert_eq!(k3, 6.4);
        let far = BeliefMean { mu_d: 400.0, mu_k: -2.0, t: 7 };
        assert_eq!(prior_mean(&far, Action::Replace, &params), prior_mean(&b, Action::Replace, &params));
    }

    #[test]
    fn confirming_observation_leaves_means_unchanged() {
        let (_, s) = schedule_for(0.5);
        let prior = (-126.24, 6.4);
        let post = posterior_mean(prior, -126.24, &s, 1);
        assert_abs_diff_eq!(post.mu_d, -126.24, epsilon = 1e-12);
        assert_abs_diff_eq!(post.mu_k, 6.4, epsilon = 1e-12);
    }

    #[test]
    fn uninformative_observation_leaves_means_unchanged() {
        let (_, s) = schedule_for(1e9);
        let post = posterior_mean((-126.24, 6.4), 500.0, &s, 1);
        assert_abs_diff_eq!(post.mu_d, -126.24, epsilon = 1e-3);
        assert_abs_diff_eq!(post.mu_k, 6.4, epsilon = 1e-6);
    }

    #[test]
    fn exact_observation_pins_the_level_mean() {
        let (_, s) = schedule_for(0.0);
        let post = posterior_mean((-126.24, 6.4), -120.0, &s, 1);
        assert_eq!(post.mu_d, -120.0);
        // K update with slope rho' sigma'_K / sigma'_D at sigma_e = 0.
        let e = s.entry(1);
        let slope = e.rho_prior * e.sigma_k_prior / e.sigma_d_prior;
        assert_abs_diff_eq!(post.mu_k, 6.4 + slope * 6.24, epsilon = 1e-12);
    }

    #[test]
    fn posterior_level_mean_matches_hand_arithmetic() {
        let (_, s) = schedule_for(0.5);
        let post = posterior_mean((-126.24, 6.4), -120.0, &s, 1);
        // (sigma'^2 o + sigma_e^2 mu') / (sigma_e^2 + sigma'^2)
        let sp2 = 435.7225;
        let expect = (sp2 * -120.0 + 0.25 * -126.24) / (0.25 + sp2);
        assert_abs_diff_eq!(post.mu_d, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(post.mu_d, -120.003_578, epsilon = 1e-5);
    }

    #[test]
    fn transition_law_std_matches_hand_arithmetic_and_simulation() {
        let (params, s) = schedule_for(0.5);
        let b = BeliefMean { mu_d: -132.64, mu_k: 6.4, t: 0 };
        let law = belief_transition_law(&b, Action::DoNothing, &s, 1, &params);
        // sigma'^2 / sqrt(sigma_e^2 + sigma'^2) at t = 1.
        assert_abs_diff_eq!(law.std_mu_d, 435.7225 / 435.9725f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(law.std_mu_d, 20.868, epsilon = 5e-4);

        // Simulate o_1 and apply the posterior update; the realized
        // posterior means must match the law's mean/std and lie on the
        // K line exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 200_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        let mut max_line_err: f64 = 0.0;
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            // o ~ Normal(mu'_D, sqrt(sigma_e^2 + sigma'^2))
            let o = law.mu_d_prior + (0.25f64 + 435.7225).sqrt() * z;
            let post = posterior_mean((law.mu_d_prior, law.mu_k_prior), o, &s, 1);
            sum += post.mu_d;
            sum2 += post.mu_d * post.mu_d;
            max_line_err = max_line_err.max((post.mu_k - law.mu_k_for(post.mu_d)).abs());
        }
        let mean = sum / n as f64;
        let std = (sum2 / n as f64 - mean * mean).sqrt();
        assert!((mean - law.mu_d_prior).abs() < 3.0 * law.std_mu_d / (n as f64).sqrt());
        assert!((std - law.std_mu_d).abs() / law.std_mu_d < 0.01);
        assert!(max_line_err < 1e-10, "K must be an exact linear image");
    }

    #[test]
    fn sample_state_reproduces_the_posterior_moments() {
        let (_, s) = schedule_for(0.5);
        let b = BeliefMean { mu_d: -120.0, mu_k: 6.0, t: 1 };
        let e = s.entry(1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let (mut sd, mut sk, mut sdd, mut skk, mut sdk) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let st = sample_state(&b, &s, 1, &mut rng).unwrap();
            sd += st.d;
            sk += st.k;
            sdd += st.d * st.d;
            skk += st.k * st.k;
            sdk += st.d * st.k;
        }
        let nf = n as f64;
        let (md, mk) = (sd / nf, sk / nf);
        let vd = sdd / nf - md * md;
        let vk = skk / nf - mk * mk;
        let corr = (sdk / nf - md * mk) / (vd * vk).sqrt();
        assert!((md - b.mu_d).abs() < 3.0 * e.sigma_d_post / nf.sqrt());
        assert!((mk - b.mu_k).abs() < 3.0 * e.sigma_k_post / nf.sqrt());
        assert!((corr - e.rho_post).abs() < 0.005, "corr {corr} vs {}", e.rho_post);
    }

    #[test]
    fn degenerate_rate_belief_is_constant() {
        // A schedule entry with sigma_k_post = 0 pins k at its mean.
        let params = ModelParams { sigma_k0: 1e-300, ..Default::default() }.with_sigma_e(0.5);
        let s = precompute_schedule(&params);
        let b = BeliefMean { mu_d: -100.0, mu_k: 6.4, t: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let st = sample_state(&b, &s, 0, &mut rng).unwrap();
            assert_abs_diff_eq!(st.k, 6.4, epsilon = 1e-12);
        }
    }

    #[test]
    fn filter_tracks_exact_observations() {
        let (params, s) = schedule_for(0.0);
        let mut filter = BeliefFilter::new(params, s);
        let mut d = params.mu_d0;
        let mut k = params.mu_k0;
        for _ in 0..5 {
            d += k; // a0 dynamics on the true path
            let b = filter.advance(Action::DoNothing, d);
            assert_abs_diff_eq!(b.mu_d, d, epsilon = 1e-9);
        }
        k -= params.delta_k;
        d += k;
        let b = filter.advance(Action::ReduceRate, d);
        assert_abs_diff_eq!(b.mu_d, d, epsilon = 1e-9);
        assert_eq!(b.t, 6);
    }

    #[test]
    fn schedule_csv_has_a_row_per_timestep() {
        let (params, s) = schedule_for(50.0);
        let csv = s.to_csv();
        assert_eq!(csv.lines().count(), params.t_end + 2);
        assert!(csv.starts_with("t,sigma_d_prior"));
    }

    proptest! {
        /// Monotonicity in the observation noise: at fixed t, a noisier
        /// sensor leaves more posterior uncertainty in the level.
        #[test]
        fn posterior_level_std_increases_with_sigma_e(
            lo in 0.01f64..100.0,
            factor in 1.01f64..100.0,
            t in 1usize..=20,
        ) {
            let (_, s_lo) = schedule_for(lo);
            let (_, s_hi) = schedule_for(lo * factor);
            prop_assert!(s_lo.entry(t).sigma_d_post <= s_hi.entry(t).sigma_d_post + 1e-12);
        }

        /// A confirming observation never moves the means, whatever the
        /// prior location.
        #[test]
        fn confirming_observation_is_a_fixed_point(
            mu_d in -500.0f64..500.0,
            mu_k in -10.0f64..10.0,
            sigma_e in 0.0f64..1000.0,
            t in 1usize..=20,
        ) {
            let (_, s) = schedule_for(sigma_e);
            let post = posterior_mean((mu_d, mu_k), mu_d, &s, t);
            prop_assert!((post.mu_d - mu_d).abs() < 1e-9);
            prop_assert!((post.mu_k - mu_k).abs() < 1e-9);
        }
    }
}
