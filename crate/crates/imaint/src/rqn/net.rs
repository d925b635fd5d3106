//! Network parameters, forward pass, and backpropagation through time.

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;

use crate::env::Action;

/// Leaky-ReLU slope on all fully connected activations.
pub const LEAKY_SLOPE: f64 = 0.3;

/// Layer widths. The defaults give the 57,195-parameter network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkShape {
    /// First feature layer on each input stream.
    pub fc1: usize,
    /// Second feature layer on each input stream.
    pub fc2: usize,
    /// LSTM hidden/cell size.
    pub hidden: usize,
    /// Post-LSTM feature layer feeding both heads.
    pub fc3: usize,
}

impl Default for NetworkShape {
    fn default() -> Self {
        Self { fc1: 20, fc2: 25, hidden: 80, fc3: 160 }
    }
}

/// Dense layer computing `y = x W + b` with `W: [in, out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn init<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (n_in as f64).sqrt();
        Dense {
            w: Array2::from_shape_fn((n_in, n_out), |_| rng.random_range(-bound..bound)),
            b: Array1::from_shape_fn(n_out, |_| rng.random_range(-bound..bound)),
        }
    }

    fn zeros(n_in: usize, n_out: usize) -> Self {
        Dense { w: Array2::zeros((n_in, n_out)), b: Array1::zeros(n_out) }
    }

    fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }
}

/// LSTM layer in the standard no-peephole form with separate input-path
/// and recurrent-path bias vectors (the variant whose scalar count matches
/// the published total). Gate blocks are ordered input, forget, cell,
/// output along the `4 * hidden` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    pub w_ih: Array2<f64>,
    pub w_hh: Array2<f64>,
    pub b_ih: Array1<f64>,
    pub b_hh: Array1<f64>,
}

impl LstmLayer {
    fn init<R: Rng + ?Sized>(n_in: usize, hidden: usize, rng: &mut R) -> Self {
        let bi = 1.0 / (n_in as f64).sqrt();
        let bh = 1.0 / (hidden as f64).sqrt();
        LstmLayer {
            w_ih: Array2::from_shape_fn((n_in, 4 * hidden), |_| rng.random_range(-bi..bi)),
            w_hh: Array2::from_shape_fn((hidden, 4 * hidden), |_| rng.random_range(-bh..bh)),
            b_ih: Array1::from_shape_fn(4 * hidden, |_| rng.random_range(-bi..bi)),
            b_hh: Array1::from_shape_fn(4 * hidden, |_| rng.random_range(-bh..bh)),
        }
    }

    fn zeros(n_in: usize, hidden: usize) -> Self {
        LstmLayer {
            w_ih: Array2::zeros((n_in, 4 * hidden)),
            w_hh: Array2::zeros((hidden, 4 * hidden)),
            b_ih: Array1::zeros(4 * hidden),
            b_hh: Array1::zeros(4 * hidden),
        }
    }
}

/// Scalar count of an LSTM layer with two bias vectors per gate stack.
pub fn lstm_param_count(n_in: usize, hidden: usize) -> usize {
    4 * hidden * (n_in + hidden + 2)
}

/// All network parameters.
///
/// The value head is the `upsilon` group, the advantage head the `alpha`
/// group, and everything else the shared `theta` group; the optimizer
/// treats them uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub shape: NetworkShape,
    pub fc1_obs: Dense,
    pub fc1_act: Dense,
    pub fc2_obs: Dense,
    pub fc2_act: Dense,
    pub lstm: LstmLayer,
    pub fc3: Dense,
    pub value_head: Dense,
    pub advantage_head: Dense,
}

impl NetworkParams {
    /// Random initialization, uniform in `±1/sqrt(fan_in)` per tensor.
    pub fn init<R: Rng + ?Sized>(shape: NetworkShape, rng: &mut R) -> Self {
        let concat = 2 * shape.fc2;
        NetworkParams {
            shape,
            fc1_obs: Dense::init(1, shape.fc1, rng),
            fc1_act: Dense::init(4, shape.fc1, rng),
            fc2_obs: Dense::init(shape.fc1, shape.fc2, rng),
            fc2_act: Dense::init(shape.fc1, shape.fc2, rng),
            lstm: LstmLayer::init(concat, shape.hidden, rng),
            fc3: Dense::init(shape.hidden, shape.fc3, rng),
            value_head: Dense::init(shape.fc3, 1, rng),
            advantage_head: Dense::init(shape.fc3, 4, rng),
        }
    }

    /// All-zero parameters of the same shape (gradient accumulators).
    pub fn zeros(shape: NetworkShape) -> Self {
        let concat = 2 * shape.fc2;
        NetworkParams {
            shape,
            fc1_obs: Dense::zeros(1, shape.fc1),
            fc1_act: Dense::zeros(4, shape.fc1),
            fc2_obs: Dense::zeros(shape.fc1, shape.fc2),
            fc2_act: Dense::zeros(shape.fc1, shape.fc2),
            lstm: LstmLayer::zeros(concat, shape.hidden),
            fc3: Dense::zeros(shape.hidden, shape.fc3),
            value_head: Dense::zeros(shape.fc3, 1),
            advantage_head: Dense::zeros(shape.fc3, 4),
        }
    }

    /// Named views of every tensor, in a fixed order shared by the flat
    /// representation, the optimizer, and the checkpoint format. Biases
    /// are reported as single-row matrices.
    pub fn views(&self) -> Vec<(&'static str, &[f64], (usize, usize))> {
        vec![
            ("fc1_obs.w", self.fc1_obs.w.as_slice().unwrap(), self.fc1_obs.w.dim()),
            ("fc1_obs.b", self.fc1_obs.b.as_slice().unwrap(), (1, self.fc1_obs.b.len())),
            ("fc1_act.w", self.fc1_act.w.as_slice().unwrap(), self.fc1_act.w.dim()),
            ("fc1_act.b", self.fc1_act.b.as_slice().unwrap(), (1, self.fc1_act.b.len())),
            ("fc2_obs.w", self.fc2_obs.w.as_slice().unwrap(), self.fc2_obs.w.dim()),
            ("fc2_obs.b", self.fc2_obs.b.as_slice().unwrap(), (1, self.fc2_obs.b.len())),
            ("fc2_act.w", self.fc2_act.w.as_slice().unwrap(), self.fc2_act.w.dim()),
            ("fc2_act.b", self.fc2_act.b.as_slice().unwrap(), (1, self.fc2_act.b.len())),
            ("lstm.w_ih", self.lstm.w_ih.as_slice().unwrap(), self.lstm.w_ih.dim()),
            ("lstm.w_hh", self.lstm.w_hh.as_slice().unwrap(), self.lstm.w_hh.dim()),
            ("lstm.b_ih", self.lstm.b_ih.as_slice().unwrap(), (1, self.lstm.b_ih.len())),
            ("lstm.b_hh", self.lstm.b_hh.as_slice().unwrap(), (1, self.lstm.b_hh.len())),
            ("fc3.w", self.fc3.w.as_slice().unwrap(), self.fc3.w.dim()),
            ("fc3.b", self.fc3.b.as_slice().unwrap(), (1, self.fc3.b.len())),
            ("value_head.w", self.value_head.w.as_slice().unwrap(), self.value_head.w.dim()),
            ("value_head.b", self.value_head.b.as_slice().unwrap(), (1, self.value_head.b.len())),
            ("advantage_head.w", self.advantage_head.w.as_slice().unwrap(), self.advantage_head.w.dim()),
            ("advantage_head.b", self.advantage_head.b.as_slice().unwrap(), (1, self.advantage_head.b.len())),
        ]
    }

    pub fn views_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.fc1_obs.w.as_slice_mut().unwrap(),
            self.fc1_obs.b.as_slice_mut().unwrap(),
            self.fc1_act.w.as_slice_mut().unwrap(),
            self.fc1_act.b.as_slice_mut().unwrap(),
            self.fc2_obs.w.as_slice_mut().unwrap(),
            self.fc2_obs.b.as_slice_mut().unwrap(),
            self.fc2_act.w.as_slice_mut().unwrap(),
            self.fc2_act.b.as_slice_mut().unwrap(),
            self.lstm.w_ih.as_slice_mut().unwrap(),
            self.lstm.w_hh.as_slice_mut().unwrap(),
            self.lstm.b_ih.as_slice_mut().unwrap(),
            self.lstm.b_hh.as_slice_mut().unwrap(),
            self.fc3.w.as_slice_mut().unwrap(),
            self.fc3.b.as_slice_mut().unwrap(),
            self.value_head.w.as_slice_mut().unwrap(),
            self.value_head.b.as_slice_mut().unwrap(),
            self.advantage_head.w.as_slice_mut().unwrap(),
            self.advantage_head.b.as_slice_mut().unwrap(),
        ]
    }

    /// Exact number of stored scalars, by enumeration.
    pub fn param_count(&self) -> usize {
        self.views().iter().map(|(_, v, _)| v.len()).sum()
    }

    /// Sum of squared parameters (the L2 regularization term).
    pub fn squared_norm(&self) -> f64 {
        self.views()
            .iter()
            .map(|(_, v, _)| v.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (_, v, _) in self.views() {
            out.extend_from_slice(v);
        }
        out
    }

    pub fn load_flat(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for view in self.views_mut() {
            view.copy_from_slice(&flat[offset..offset + view.len()]);
            offset += view.len();
        }
        assert_eq!(offset, flat.len());
    }
}

/// LSTM hidden and cell state for a batch of trajectories. Reset to zeros
/// at the start of every trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentState {
    pub h: Array2<f64>,
    pub c: Array2<f64>,
}

impl RecurrentState {
    pub fn zeros(batch: usize, hidden: usize) -> Self {
        RecurrentState { h: Array2::zeros((batch, hidden)), c: Array2::zeros((batch, hidden)) }
    }
}

/// Everything a forward step produces.
#[derive(Debug, Clone)]
pub struct StepOutput {
    /// Q estimates, `[batch, 4]`.
    pub q: Array2<f64>,
    /// Value stream output, `[batch]`.
    pub v: Array1<f64>,
    /// Advantage stream output (before centering), `[batch, 4]`.
    pub adv: Array2<f64>,
    pub state: RecurrentState,
}

/// Intermediate activations cached for backpropagation through time.
pub(crate) struct StepCache {
    pub obs: Array2<f64>,
    pub act: Array2<f64>,
    pub fc1_obs_pre: Array2<f64>,
    pub fc1_obs_out: Array2<f64>,
    pub fc1_act_pre: Array2<f64>,
    pub fc1_act_out: Array2<f64>,
    pub fc2_obs_pre: Array2<f64>,
    pub fc2_act_pre: Array2<f64>,
    /// Concatenated stream outputs, the LSTM input, `[batch, 2*fc2]`.
    pub x: Array2<f64>,
    pub h_prev: Array2<f64>,
    pub c_prev: Array2<f64>,
    pub gate_i: Array2<f64>,
    pub gate_f: Array2<f64>,
    pub gate_g: Array2<f64>,
    pub gate_o: Array2<f64>,
    pub tanh_c: Array2<f64>,
    pub fc3_pre: Array2<f64>,
    pub fc3_out: Array2<f64>,
}

fn leaky_relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| if v > 0.0 { v } else { LEAKY_SLOPE * v })
}

fn leaky_relu_grad(pre: &Array2<f64>, grad: &Array2<f64>) -> Array2<f64> {
    let mut out = grad.clone();
    out.zip_mut_with(pre, |g, &p| {
        if p <= 0.0 {
            *g *= LEAKY_SLOPE;
        }
    });
    out
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One-hot encode a slice of actions into `[batch, 4]`.
pub fn one_hot(actions: &[Action]) -> Array2<f64> {
    let mut out = Array2::zeros((actions.len(), 4));
    for (i, a) in actions.iter().enumerate() {
        out[(i, a.index())] = 1.0;
    }
    out
}

/// Forward one timestep for a batch.
///
/// `obs` is `[batch, 1]`, `act_onehot` is `[batch, 4]` (the previous
/// action), `state` the recurrent state entering the step.
pub fn forward(
    params: &NetworkParams,
    obs: &Array2<f64>,
    act_onehot: &Array2<f64>,
    state: &RecurrentState,
) -> StepOutput {
    let (out, _) = forward_impl(params, obs, act_onehot, state, false);
    out
}

pub(crate) fn forward_cached(
    params: &NetworkParams,
    obs: &Array2<f64>,
    act_onehot: &Array2<f64>,
    state: &RecurrentState,
) -> (StepOutput, StepCache) {
    let (out, cache) = forward_impl(params, obs, act_onehot, state, true);
    (out, cache.expect("cache requested"))
}

fn forward_impl(
    params: &NetworkParams,
    obs: &Array2<f64>,
    act_onehot: &Array2<f64>,
    state: &RecurrentState,
    want_cache: bool,
) -> (StepOutput, Option<StepCache>) {
    debug_assert!(obs.iter().all(|v| v.is_finite()), "non-finite observation input");
    let hidden = params.shape.hidden;
    let batch = obs.nrows();

    let fc1_obs_pre = params.fc1_obs.forward(obs);
    let fc1_obs_out = leaky_relu(&fc1_obs_pre);
    let fc1_act_pre = params.fc1_act.forward(act_onehot);
    let fc1_act_out = leaky_relu(&fc1_act_pre);
    let fc2_obs_pre = params.fc2_obs.forward(&fc1_obs_out);
    let fc2_act_pre = params.fc2_act.forward(&fc1_act_out);

    let mut x = Array2::zeros((batch, 2 * params.shape.fc2));
    x.slice_mut(s![.., ..params.shape.fc2]).assign(&leaky_relu(&fc2_obs_pre));
    x.slice_mut(s![.., params.shape.fc2..]).assign(&leaky_relu(&fc2_act_pre));

    // LSTM step: pre-activations for the four gate blocks at once.
    let mut gates = x.dot(&params.lstm.w_ih) + state.h.dot(&params.lstm.w_hh);
    gates += &params.lstm.b_ih;
    gates += &params.lstm.b_hh;

    let gate_i = gates.slice(s![.., 0..hidden]).mapv(sigmoid);
    let gate_f = gates.slice(s![.., hidden..2 * hidden]).mapv(sigmoid);
    let gate_g = gates.slice(s![.., 2 * hidden..3 * hidden]).mapv(f64::tanh);
    let gate_o = gates.slice(s![.., 3 * hidden..4 * hidden]).mapv(sigmoid);

    let c = &gate_f * &state.c + &gate_i * &gate_g;
    let tanh_c = c.mapv(f64::tanh);
    let h = &gate_o * &tanh_c;

    let fc3_pre = params.fc3.forward(&h);
    let fc3_out = leaky_relu(&fc3_pre);

    let v_mat = params.value_head.forward(&fc3_out); // [batch, 1]
    let v = v_mat.column(0).to_owned();
    let adv = params.advantage_head.forward(&fc3_out); // [batch, 4]

    // Dueling combination with the mean-advantage correction.
    let adv_mean = adv.mean_axis(Axis(1)).expect("4 actions");
    let mut q = adv.clone();
    for ((mut row, &vi), &mi) in q.axis_iter_mut(Axis(0)).zip(v.iter()).zip(adv_mean.iter()) {
        row.mapv_inplace(|a| vi + (a - mi));
    }

    let cache = want_cache.then(|| StepCache {
        obs: obs.clone(),
        act: act_onehot.clone(),
        fc1_obs_pre,
        fc1_obs_out,
        fc1_act_pre,
        fc1_act_out,
        fc2_obs_pre,
        fc2_act_pre,
        x,
        h_prev: state.h.clone(),
        c_prev: state.c.clone(),
        gate_i: gate_i.clone(),
        gate_f: gate_f.clone(),
        gate_g: gate_g.clone(),
        gate_o: gate_o.clone(),
        tanh_c: tanh_c.clone(),
        fc3_pre,
        fc3_out,
    });

    (
        StepOutput { q, v, adv, state: RecurrentState { h, c } },
        cache,
    )
}

/// Single-sample forward: returns `(q, v, adv, next state)`.
pub fn forward_single(
    params: &NetworkParams,
    obs: f64,
    prev_action: Action,
    state: &RecurrentState,
) -> ([f64; 4], f64, [f64; 4], RecurrentState) {
    let obs_m = Array2::from_shape_vec((1, 1), vec![obs]).unwrap();
    let act_m = one_hot(&[prev_action]);
    let out = forward(params, &obs_m, &act_m, state);
    let mut q = [0.0; 4];
    let mut adv = [0.0; 4];
    for i in 0..4 {
        q[i] = out.q[(0, i)];
        adv[i] = out.adv[(0, i)];
    }
    (q, out.v[0], adv, out.state)
}

/// Gradients flowing backward out of one step into the previous one.
pub(crate) struct BackFlow {
    pub dh: Array2<f64>,
    pub dc: Array2<f64>,
}

/// Backward pass of one step.
///
/// `dq` is the loss gradient w.r.t. the step's Q outputs, `flow` carries
/// `dL/dh` and `dL/dc` from the following step; gradients accumulate into
/// `grads`, and the returned flow feeds the previous step.
pub(crate) fn backward_step(
    params: &NetworkParams,
    cache: &StepCache,
    dq: &Array2<f64>,
    flow: BackFlow,
    grads: &mut NetworkParams,
) -> BackFlow {
    let fc2 = params.shape.fc2;
    let hidden = params.shape.hidden;

    // Dueling head: dv = rowsum(dq), dadv = dq - rowsum(dq)/4.
    let dv = dq.sum_axis(Axis(1)); // [batch]
    let mut dadv = dq.clone();
    for (mut row, &s) in dadv.axis_iter_mut(Axis(0)).zip(dv.iter()) {
        row.mapv_inplace(|g| g - s / 4.0);
    }
    let dv_mat = dv.insert_axis(Axis(1)); // [batch, 1]

    grads.value_head.w += &cache.fc3_out.t().dot(&dv_mat);
    grads.value_head.b += &dv_mat.sum_axis(Axis(0));
    grads.advantage_head.w += &cache.fc3_out.t().dot(&dadv);
    grads.advantage_head.b += &dadv.sum_axis(Axis(0));

    let dz = dv_mat.dot(&params.value_head.w.t()) + dadv.dot(&params.advantage_head.w.t());
    let dfc3_pre = leaky_relu_grad(&cache.fc3_pre, &dz);
    // h is the LSTM output this step; cache.gate_o * tanh_c reproduces it.
    let h = &cache.gate_o * &cache.tanh_c;
    grads.fc3.w += &h.t().dot(&dfc3_pre);
    grads.fc3.b += &dfc3_pre.sum_axis(Axis(0));

    let dh = dfc3_pre.dot(&params.fc3.w.t()) + &flow.dh;

    // LSTM backward.
    let d_o = &dh * &cache.tanh_c;
    let dc_total = &dh * &cache.gate_o * cache.tanh_c.mapv(|t| 1.0 - t * t) + &flow.dc;
    let d_i = &dc_total * &cache.gate_g;
    let d_g = &dc_total * &cache.gate_i;
    let d_f = &dc_total * &cache.c_prev;
    let dc_prev = &dc_total * &cache.gate_f;

    let batch = dq.nrows();
    let mut dgates = Array2::zeros((batch, 4 * hidden));
    dgates
        .slice_mut(s![.., 0..hidden])
        .assign(&(&d_i * &cache.gate_i * &cache.gate_i.mapv(|v| 1.0 - v)));
    dgates
        .slice_mut(s![.., hidden..2 * hidden])
        .assign(&(&d_f * &cache.gate_f * &cache.gate_f.mapv(|v| 1.0 - v)));
    dgates
        .slice_mut(s![.., 2 * hidden..3 * hidden])
        .assign(&(&d_g * &cache.gate_g.mapv(|v| 1.0 - v * v)));
    dgates
        .slice_mut(s![.., 3 * hidden..4 * hidden])
        .assign(&(&d_o * &cache.gate_o * &cache.gate_o.mapv(|v| 1.0 - v)));

    grads.lstm.w_ih += &cache.x.t().dot(&dgates);
    grads.lstm.w_hh += &cache.h_prev.t().dot(&dgates);
    let dbias = dgates.sum_axis(Axis(0));
    grads.lstm.b_ih += &dbias;
    grads.lstm.b_hh += &dbias;

    let dx = dgates.dot(&params.lstm.w_ih.t());
    let dh_prev = dgates.dot(&params.lstm.w_hh.t());

    // Observation stream.
    let dx_obs = dx.slice(s![.., ..fc2]).to_owned();
    let dfc2_obs = leaky_relu_grad(&cache.fc2_obs_pre, &dx_obs);
    grads.fc2_obs.w += &cache.fc1_obs_out.t().dot(&dfc2_obs);
    grads.fc2_obs.b += &dfc2_obs.sum_axis(Axis(0));
    let da1_obs = dfc2_obs.dot(&params.fc2_obs.w.t());
    let dfc1_obs = leaky_relu_grad(&cache.fc1_obs_pre, &da1_obs);
    grads.fc1_obs.w += &cache.obs.t().dot(&dfc1_obs);
    grads.fc1_obs.b += &dfc1_obs.sum_axis(Axis(0));

    // Action stream.
    let dx_act = dx.slice(s![.., fc2..]).to_owned();
    let dfc2_act = leaky_relu_grad(&cache.fc2_act_pre, &dx_act);
    grads.fc2_act.w += &cache.fc1_act_out.t().dot(&dfc2_act);
    grads.fc2_act.b += &dfc2_act.sum_axis(Axis(0));
    let da1_act = dfc2_act.dot(&params.fc2_act.w.t());
    let dfc1_act = leaky_relu_grad(&cache.fc1_act_pre, &da1_act);
    grads.fc1_act.w += &cache.act.t().dot(&dfc1_act);
    grads.fc1_act.b += &dfc1_act.sum_axis(Axis(0));

    BackFlow { dh: dh_prev, dc: dc_prev }
}
