//! Regression and generation metrics, and the `key=value` metrics file.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, PipelineError};
use crate::codec::{decode, detokenize, Vocabulary, EOS};
use crate::recurrent::{sample_sequence_with, RecurrentModel};

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub rounded_accuracy: f64,
    /// `(prediction, target)` per example, in dataset order.
    pub predictions: Vec<(f64, f64)>,
}

/// MAE and rounded accuracy of `(prediction, target)` pairs. Rounding is
/// half away from zero.
pub fn regression_metrics(predictions: &[(f64, f64)]) -> Result<RegressionMetrics, PipelineError> {
    if predictions.is_empty() {
        return Err(PipelineError::EmptyEvaluationSet);
    }
    let n = predictions.len() as f64;
    let mae = predictions.iter().map(|(p, t)| (p - t).abs()).sum::<f64>() / n;
    let hits = predictions.iter().filter(|(p, t)| p.round() == *t).count();
    Ok(RegressionMetrics {
        mae,
        rounded_accuracy: hits as f64 / n,
        predictions: predictions.to_vec(),
    })
}

pub fn evaluate_regression(model: &RecurrentModel, data: &Dataset) -> Result<RegressionMetrics, PipelineError> {
    let predictions = data
        .examples
        .iter()
        .map(|ex| Ok((model.predict(&ex.ids)?, ex.target)))
        .collect::<Result<Vec<_>, PipelineError>>()?;
    regression_metrics(&predictions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationMetrics {
    pub validity: f64,
    /// `(K, unique@K)` in the requested order.
    pub unique_at_k: Vec<(usize, f64)>,
    pub novelty: f64,
}

/// Metrics of already drawn samples.
///
/// A sample is valid when it is terminated by `EOS` and its tokens decode to
/// a tree; samples cut off at the length limit are invalid. `unique@K` is the number of
/// distinct valid canonical strings among the first `K` samples divided by
/// `K`. Novelty is the fraction of distinct valid strings that are not in
/// `reference`. Both are 0 when there is no valid sample.
pub fn generation_metrics(
    samples: &[Vec<usize>],
    vocab: &Vocabulary,
    reference: &HashSet<String>,
    k_values: &[usize],
) -> Result<GenerationMetrics, PipelineError> {
    if samples.is_empty() {
        return Err(PipelineError::EmptyEvaluationSet);
    }
    if let Some(&k) = k_values.iter().find(|&&k| k > samples.len() || k == 0) {
        return Err(PipelineError::KTooLarge { k, samples: samples.len() });
    }
    let canonical: Vec<Option<String>> = samples
        .iter()
        .map(|ids| {
            if !ids.contains(&EOS) {
                return None;
            }
            let ts = detokenize(ids, vocab).ok()?;
            decode(&ts).ok()?;
            Some(ts.to_canonical_string())
        })
        .collect();
    let valid = canonical.iter().filter(|c| c.is_some()).count();
    let unique_at_k = k_values
        .iter()
        .map(|&k| {
            let distinct: HashSet<&String> = canonical[..k].iter().flatten().collect();
            (k, distinct.len() as f64 / k as f64)
        })
        .collect();
    let distinct: HashSet<&String> = canonical.iter().flatten().collect();
    let novelty = if distinct.is_empty() {
        0.0
    } else {
        distinct.iter().filter(|s| !reference.contains(s.as_str())).count() as f64 / distinct.len() as f64
    };
    Ok(GenerationMetrics {
        validity: valid as f64 / samples.len() as f64,
        unique_at_k,
        novelty,
    })
}

/// Draws `sample_count` sequences from one seeded stream and scores them
/// against the canonical strings in `reference`.
pub fn evaluate_generation(
    model: &RecurrentModel,
    reference: &HashSet<String>,
    k_values: &[usize],
    sample_count: usize,
    max_len: usize,
    temperature: f64,
    seed: u64,
) -> Result<GenerationMetrics, PipelineError> {
    if let Some(&k) = k_values.iter().find(|&&k| k > sample_count) {
        return Err(PipelineError::KTooLarge { k, samples: sample_count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..sample_count)
        .map(|_| sample_sequence_with(model, max_len, temperature, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    generation_metrics(&samples, model.vocab(), reference, k_values)
}

/// One `key=value` line per metric; values use shortest round-trip form.
pub fn write_metrics(mut out: impl Write, metrics: &[(String, f64)]) -> Result<(), PipelineError> {
    for (k, v) in metrics {
        writeln!(out, "{k}={v:?}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn parse_metrics(input: impl BufRead) -> Result<Vec<(String, f64)>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: &str| PipelineError::Metrics {
            line: i + 1,
            message: message.to_string(),
        };
        let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        out.push((k.to_string(), v.parse().map_err(|_| bad("value is not a number"))?));
    }
    Ok(out)
}

impl RegressionMetrics {
    pub fn to_pairs(&self) -> Vec<(String, f64)> {
        vec![
            ("mae".into(), self.mae),
            ("rounded_accuracy".into(), self.rounded_accuracy),
            ("count".into(), self.predictions.len() as f64),
        ]
    }
}

impl GenerationMetrics {
    pub fn to_pairs(&self) -> Vec<(String, f64)> {
        let mut out = vec![("validity".to_string(), self.validity)];
        out.extend(self.unique_at_k.iter().map(|(k, u)| (format!("unique@{k}"), *u)));
        out.push(("novelty".into(), self.novelty));
        out
    }
}
