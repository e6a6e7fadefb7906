//! Autoregressive sampling from the next-token head.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelError, RecurrentModel};
use crate::codec::{BOS, EOS};

/// Samples from `BOS` until `EOS` or until `max_len` tokens follow `BOS`.
/// The result starts with `BOS` and ends with `EOS` when one was drawn.
/// Temperature 0 decodes greedily.
pub fn sample_sequence(model: &RecurrentModel, max_len: usize, temperature: f64, seed: u64) -> Result<Vec<usize>, ModelError> {
    sample_sequence_with(model, max_len, temperature, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_sequence_with<R: Rng + ?Sized>(
    model: &RecurrentModel,
    max_len: usize,
    temperature: f64,
    rng: &mut R,
) -> Result<Vec<usize>, ModelError> {
    if max_len < 1 {
        return Err(ModelError::MaxLenTooSmall);
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(ModelError::BadConfig(format!("temperature {temperature} must be finite and non-negative")));
    }
    let mut state = model.initial_state();
    let mut ids = vec![BOS];
    let mut probs = vec![0.0; model.vocab_size()];
    while ids.len() <= max_len {
        let out = model.step(&mut state, *ids.last().expect("non-empty"))?;
        let next = if temperature == 0.0 {
            argmax(&out.logits)
        } else {
            let max = out.logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (p, &z) in probs.iter_mut().zip(&out.logits) {
                *p = ((z - max) / temperature).exp();
            }
            let total: f64 = probs.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut pick = probs.len() - 1;
            for (i, &p) in probs.iter().enumerate() {
                if u < p {
                    pick = i;
                    break;
                }
                u -= p;
            }
            pick
        };
        ids.push(next);
        if next == EOS {
            break;
        }
    }
    Ok(ids)
}

/// First index of the largest value.
fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}
