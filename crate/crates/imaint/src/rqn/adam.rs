//! Adam optimizer with the AMSGRAD maximum-variance correction.

use super::net::NetworkParams;

/// First/second moment estimates over the flattened parameter vector.
#[derive(Debug, Clone)]
pub struct AdamState {
    beta1: f64,
    beta2: f64,
    eps: f64,
    amsgrad: bool,
    m: Vec<f64>,
    v: Vec<f64>,
    v_max: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(n_params: usize, beta1: f64, beta2: f64, eps: f64, amsgrad: bool) -> Self {
        AdamState {
            beta1,
            beta2,
            eps,
            amsgrad,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            v_max: vec![0.0; n_params],
            step: 0,
        }
    }

    /// One update with learning rate `lr`. Gradients and parameters share
    /// the flat tensor order of [`NetworkParams::views`].
    pub fn step(&mut self, params: &mut NetworkParams, grads: &NetworkParams, lr: f64) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        let mut offset = 0;
        let grad_views = grads.views();
        let mut grad_iter = grad_views.iter();
        for view in params.views_mut() {
            let (_, g, _) = grad_iter.next().expect("grads mirror params");
            debug_assert_eq!(view.len(), g.len());
            for (i, (p, &gi)) in view.iter_mut().zip(g.iter()).enumerate() {
                let j = offset + i;
                self.m[j] = self.beta1 * self.m[j] + (1.0 - self.beta1) * gi;
                self.v[j] = self.beta2 * self.v[j] + (1.0 - self.beta2) * gi * gi;
                let v_hat = if self.amsgrad {
                    self.v_max[j] = self.v_max[j].max(self.v[j]);
                    self.v_max[j]
                } else {
                    self.v[j]
                };
                let denom = (v_hat / bc2).sqrt() + self.eps;
                *p -= lr * (self.m[j] / bc1) / denom;
            }
            offset += view.len();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rqn::net::NetworkShape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steps_move_against_the_gradient() {
        let shape = NetworkShape { fc1: 2, fc2: 2, hidden: 2, fc3: 2 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut params = NetworkParams::init(shape, &mut rng);
        let before = params.to_flat();
        let mut grads = NetworkParams::zeros(shape);
        grads.fc3.w[(0, 0)] = 1.0;
        grads.fc3.w[(1, 1)] = -2.0;
        let mut adam = AdamState::new(params.param_count(), 0.9, 0.999, 1e-8, true);
        adam.step(&mut params, &grads, 0.01);
        let after = params.to_flat();
        let mut changed = 0;
        for (b, a) in before.iter().zip(after.iter()) {
            if (b - a).abs() > 0.0 {
                changed += 1;
            }
        }
        assert_eq!(changed, 2, "only the two touched coordinates move");
        assert!(params.fc3.w[(0, 0)] < before_param(&before, &params, (0, 0)));
        assert!(params.fc3.w[(1, 1)] > before_param(&before, &params, (1, 1)));

        fn before_param(flat: &[f64], params: &NetworkParams, idx: (usize, usize)) -> f64 {
            // Locate fc3.w inside the flat layout.
            let mut offset = 0;
            for (name, v, dim) in params.views() {
                if name == "fc3.w" {
                    return flat[offset + idx.0 * dim.1 + idx.1];
                }
                offset += v.len();
            }
            unreachable!()
        }
    }

    #[test]
    fn amsgrad_keeps_the_variance_floor() {
        // After a large gradient followed by tiny ones, AMSGRAD's
        // denominator stays at the recorded maximum, so steps stay small;
        // plain Adam's denominator decays and steps grow back.
        let shape = NetworkShape { fc1: 1, fc2: 1, hidden: 1, fc3: 1 };
        let run = |amsgrad: bool| {
            let mut params = NetworkParams::zeros(shape);
            let mut grads = NetworkParams::zeros(shape);
            let mut adam = AdamState::new(params.param_count(), 0.9, 0.999, 1e-8, amsgrad);
            grads.fc3.w[(0, 0)] = 100.0;
            adam.step(&mut params, &grads, 0.001);
            grads.fc3.w[(0, 0)] = 1e-4;
            for _ in 0..200 {
                adam.step(&mut params, &grads, 0.001);
            }
            params.fc3.w[(0, 0)]
        };
        let with = run(true);
        let without = run(false);
        assert!(with.abs() < without.abs(), "amsgrad {with} vs adam {without}");
    }
}
