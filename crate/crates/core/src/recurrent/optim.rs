//! Parameter updates. Both optimizers clip by global norm first and refuse
//! non-finite gradients without touching the model.

use super::{Gradients, ModelError, RecurrentModel};

/// Factor that brings `grads` to at most `clip_norm` in global norm.
fn clip_factor(model: &RecurrentModel, grads: &Gradients, clip_norm: Option<f64>) -> Result<f64, ModelError> {
    if grads.len() != model.param_count() {
        return Err(ModelError::ShapeMismatch {
            expected: model.param_count(),
            actual: grads.len(),
        });
    }
    let norm = grads.norm();
    if !norm.is_finite() {
        return Err(ModelError::NonFiniteGradient(norm));
    }
    Ok(match clip_norm {
        Some(c) if norm > c => c / norm,
        _ => 1.0,
    })
}

/// Plain gradient descent: `θ ← θ - lr · clip(g)`.
pub fn sgd_step(
    model: &mut RecurrentModel,
    grads: &Gradients,
    learning_rate: f64,
    clip_norm: Option<f64>,
) -> Result<(), ModelError> {
    let factor = clip_factor(model, grads, clip_norm)?;
    for (p, g) in model.params_mut().iter_mut().zip(grads.values()) {
        *p -= learning_rate * factor * g;
    }
    Ok(())
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    steps: u32,
}

impl Adam {
    pub fn new(model: &RecurrentModel) -> Adam {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; model.param_count()],
            v: vec![0.0; model.param_count()],
            steps: 0,
        }
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn step(
        &mut self,
        model: &mut RecurrentModel,
        grads: &Gradients,
        learning_rate: f64,
        clip_norm: Option<f64>,
    ) -> Result<(), ModelError> {
        let factor = clip_factor(model, grads, clip_norm)?;
        if self.m.len() != model.param_count() {
            return Err(ModelError::ShapeMismatch {
                expected: self.m.len(),
                actual: model.param_count(),
            });
        }
        self.steps += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.steps as i32);
        let c2 = 1.0 - b2.powi(self.steps as i32);
        let params = model.params_mut();
        for i in 0..params.len() {
            let g = factor * grads.values()[i];
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g;
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g;
            params[i] -= learning_rate * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrent::tests::small_model;
    use crate::recurrent::{CellKind, LossTerm};

    #[test]
    fn zero_gradient_leaves_model_unchanged() {
        let mut m = small_model(CellKind::Lstm, 1, 1);
        let before = m.clone();
        let zero = Gradients::zeros(m.param_count());
        sgd_step(&mut m, &zero, 0.1, Some(1.0)).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn clipped_update_has_expected_norm() {
        let mut m = small_model(CellKind::Vanilla, 1, 2);
        let before = m.params().to_vec();
        let grads = Gradients::from_values((0..m.param_count()).map(|i| (i % 7) as f64 - 3.0).collect());
        assert!(grads.norm() > 0.5);
        sgd_step(&mut m, &grads, 0.1, Some(0.5)).unwrap();
        let step: f64 = m.params().iter().zip(&before).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!((step - 0.1 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn updates_are_deterministic() {
        let base = small_model(CellKind::Lstm, 1, 3);
        let ids = [0, 4, 2, 4, 3, 1];
        let (_, g) = base.backward(&[(1.0, LossTerm::Regression { ids: &ids, target: 2.0 })]).unwrap();
        let (mut a, mut b) = (base.clone(), base.clone());
        sgd_step(&mut a, &g, 0.05, Some(1.0)).unwrap();
        sgd_step(&mut b, &g, 0.05, Some(1.0)).unwrap();
        assert_eq!(a, b);
        let (mut oa, mut ob) = (Adam::new(&base), Adam::new(&base));
        let (mut c, mut d) = (base.clone(), base);
        oa.step(&mut c, &g, 0.01, None).unwrap();
        ob.step(&mut d, &g, 0.01, None).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn non_finite_gradient_is_an_error() {
        let mut m = small_model(CellKind::Vanilla, 1, 4);
        let before = m.clone();
        let mut values = vec![0.0; m.param_count()];
        values[3] = f64::NAN;
        let g = Gradients::from_values(values);
        assert!(matches!(sgd_step(&mut m, &g, 0.1, None), Err(ModelError::NonFiniteGradient(_))));
        let mut adam = Adam::new(&m);
        assert!(adam.step(&mut m, &g, 0.1, Some(1.0)).is_err());
        assert_eq!(m, before);
    }

    #[test]
    fn descent_reduces_regression_loss() {
        let mut m = small_model(CellKind::Lstm, 1, 5);
        let ids = [0, 4, 2, 4, 3, 1];
        let term = [(1.0, LossTerm::Regression { ids: &ids, target: 3.0 })];
        let start = m.evaluate(&term).unwrap().total;
        let mut opt = Adam::new(&m);
        for _ in 0..50 {
            let (_, g) = m.backward(&term).unwrap();
            opt.step(&mut m, &g, 0.01, Some(5.0)).unwrap();
        }
        assert!(m.evaluate(&term).unwrap().total < 0.1 * start);
    }
}
