//! Adam optimizer over the flat parameter vector.

use serde::{Deserialize, Serialize};

use super::network::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment estimates with bias correction.
pub struct Adam<T> {
    params: AdamParams,
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n_params: usize, params: AdamParams) -> Self {
        Adam {
            params,
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
            t: 0,
        }
    }

    /// One update `theta -= lr * m_hat / (sqrt(v_hat) + eps)` in place.
    pub fn step(&mut self, theta: &mut [T], grads: &[T], lr: f64) {
        assert_eq!(theta.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let b1 = T::from_f64(self.params.beta1).unwrap();
        let b2 = T::from_f64(self.params.beta2).unwrap();
        let one = T::one();
        let eps = T::from_f64(self.params.epsilon).unwrap();
        let corr1 = T::from_f64(1.0 - self.params.beta1.powi(self.t as i32)).unwrap();
        let corr2 = T::from_f64(1.0 - self.params.beta2.powi(self.t as i32)).unwrap();
        let lr_t = T::from_f64(lr).unwrap();
        for i in 0..theta.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (one - b1) * g;
            self.v[i] = b2 * self.v[i] + (one - b2) * g * g;
            let m_hat = self.m[i] / corr1;
            let v_hat = self.v[i] / corr2;
            theta[i] = theta[i] - lr_t * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descends_a_quadratic() {
        // Minimize (x - 3)^2 from 0.
        let mut adam = Adam::<f64>::new(1, AdamParams::default());
        let mut x = vec![0.0f64];
        for _ in 0..2000 {
            let g = 2.0 * (x[0] - 3.0);
            adam.step(&mut x, &[g], 0.05);
        }
        assert!((x[0] - 3.0).abs() < 1e-3, "x = {}", x[0]);
    }

    #[test]
    fn first_step_magnitude_is_lr() {
        // With bias correction the first step is exactly lr in the gradient
        // direction (up to epsilon).
        let mut adam = Adam::<f64>::new(1, AdamParams::default());
        let mut x = vec![1.0f64];
        adam.step(&mut x, &[10.0], 0.01);
        assert!((x[0] - (1.0 - 0.01)).abs() < 1e-6);
    }
}
