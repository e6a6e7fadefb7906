//! Mini-batch training on `task loss + λ · OLR`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::pairs::sample_pair_orderings;
use super::{derive_seed, Dataset, ExperimentConfig, OptimizerKind, PairInput, PairSource, PipelineError, Task, TrajectoryRecord};
use crate::codec::EOS;
use crate::dfs::trajectory_set;
use crate::recurrent::{sgd_step, Adam, LossTerm, ModelError, RecurrentModel};

/// One line of the training log. Epoch 0 is measured before any update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub task_loss: f64,
    pub olr_loss: f64,
    pub train_acc: f64,
}

impl fmt::Display for EpochStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epoch={} task_loss={} olr_loss={} train_acc={}",
            self.epoch, self.task_loss, self.olr_loss, self.train_acc
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Perfect train accuracy (regression) and a flat loss over the plateau window.
    Converged,
    EpochBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
    pub stop: StopReason,
    /// OLR terms that could not be formed because no pair was available.
    pub missing_pairs: usize,
}

/// Pair pools per training example for the full-graph source.
fn pair_pools(
    cfg: &ExperimentConfig,
    data: &Dataset,
    records: Option<&[TrajectoryRecord]>,
) -> Result<Vec<Vec<Vec<usize>>>, PipelineError> {
    data.examples
        .iter()
        .map(|ex| {
            let orderings = match records {
                Some(recs) => recs
                    .iter()
                    .find(|r| r.graph_id() == ex.graph_id)
                    .map(|r| r.trajectories().to_vec())
                    .unwrap_or_default(),
                None => {
                    let seed = derive_seed(cfg.seed, &format!("trajectories/{}", ex.graph_id));
                    trajectory_set(&ex.graph, cfg.trajectories, seed).unwrap_or_default()
                }
            };
            orderings
                .iter()
                .map(|o| Ok(olr_ids(cfg, cfg.serialize(o, &data.vocab)?.1)))
                .collect()
        })
        .collect()
}

/// Language models compare representations at the last node, before `EOS`.
fn olr_ids(cfg: &ExperimentConfig, mut ids: Vec<usize>) -> Vec<usize> {
    if cfg.task == Task::TreeLm && ids.last() == Some(&EOS) {
        ids.pop();
    }
    ids
}

fn task_term<'a>(cfg: &ExperimentConfig, ids: &'a [usize], target: f64) -> LossTerm<'a> {
    match cfg.task {
        Task::WienerRegression => LossTerm::Regression { ids, target },
        Task::TreeLm => LossTerm::NextToken { ids },
    }
}

/// Rounded accuracy (regression) or teacher-forced next-token accuracy.
fn train_accuracy(cfg: &ExperimentConfig, model: &RecurrentModel, data: &Dataset) -> Result<f64, ModelError> {
    match cfg.task {
        Task::WienerRegression => {
            let mut hits = 0;
            for ex in &data.examples {
                if model.predict(&ex.ids)?.round() == ex.target {
                    hits += 1;
                }
            }
            Ok(hits as f64 / data.len() as f64)
        }
        Task::TreeLm => {
            let (mut hits, mut total) = (0usize, 0usize);
            for ex in &data.examples {
                let trace = model.forward(&ex.ids)?;
                for t in 0..ex.ids.len() - 1 {
                    let logits = trace.logits(t);
                    let best = (0..logits.len()).fold(0, |b, i| if logits[i] > logits[b] { i } else { b });
                    hits += usize::from(best == ex.ids[t + 1]);
                    total += 1;
                }
            }
            Ok(hits as f64 / total.max(1) as f64)
        }
    }
}

pub fn train(
    cfg: &ExperimentConfig,
    data: &Dataset,
    records: Option<&[TrajectoryRecord]>,
) -> Result<(RecurrentModel, TrainLog), PipelineError> {
    train_with_log(cfg, data, records, |_| {})
}

/// Trains a fresh model. `records` supplies stored trajectory sets for the
/// full-graph pair source, matched to examples by graph id; without them the
/// sets are computed on the fly. `on_epoch` sees every log line as it is made.
pub fn train_with_log(
    cfg: &ExperimentConfig,
    data: &Dataset,
    records: Option<&[TrajectoryRecord]>,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<(RecurrentModel, TrainLog), PipelineError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(PipelineError::EmptyEvaluationSet);
    }
    let mut model = RecurrentModel::new(cfg.model_config(), data.vocab.clone(), derive_seed(cfg.seed, "model"))?;
    if cfg.task == Task::WienerRegression {
        let n = data.len() as f64;
        let mean = data.examples.iter().map(|e| e.target).sum::<f64>() / n;
        let var = data.examples.iter().map(|e| (e.target - mean).powi(2)).sum::<f64>() / n;
        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
        model.set_output_calibration(mean, std);
    }
    let pools = match cfg.pair_source {
        PairSource::FullGraph => pair_pools(cfg, data, records)?,
        PairSource::DfsSubgraph => Vec::new(),
    };
    let target = cfg.olr_target();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "train"));
    let draw_pair = |i: usize, rng: &mut ChaCha8Rng| -> Result<Option<(Vec<usize>, Vec<usize>)>, PipelineError> {
        match cfg.pair_source {
            PairSource::FullGraph => {
                let pool = &pools[i];
                if pool.len() < 2 {
                    return Ok(None);
                }
                let picked = rand::seq::index::sample(rng, pool.len(), 2);
                Ok(Some((pool[picked.index(0)].clone(), pool[picked.index(1)].clone())))
            }
            PairSource::DfsSubgraph => match sample_pair_orderings(PairInput::Graph(&data.examples[i].graph), cfg, rng) {
                Ok((a, b)) => Ok(Some((
                    olr_ids(cfg, cfg.serialize(&a, &data.vocab)?.1),
                    olr_ids(cfg, cfg.serialize(&b, &data.vocab)?.1),
                ))),
                Err(PipelineError::RetriesExhausted(_)) => Ok(None),
                Err(e) => Err(e),
            },
        }
    };
    let diverged = |epoch: usize, detail: String| PipelineError::Diverged { epoch, detail };

    let mut log = TrainLog {
        epochs: Vec::new(),
        stop: StopReason::EpochBudget,
        missing_pairs: 0,
    };
    // epoch 0: the untrained model
    {
        let mut task = 0.0;
        let mut olr = (0.0, 0usize);
        for (i, ex) in data.examples.iter().enumerate() {
            task += model.evaluate(&[(1.0, task_term(cfg, &ex.ids, ex.target))])?.total;
            if let Some((a, b)) = draw_pair(i, &mut rng)? {
                olr.0 += model.olr_loss(&a, &b, target)?;
                olr.1 += 1;
            }
        }
        let stats = EpochStats {
            epoch: 0,
            task_loss: task / data.len() as f64,
            olr_loss: olr.0 / olr.1.max(1) as f64,
            train_acc: train_accuracy(cfg, &model, data)?,
        };
        on_epoch(&stats);
        log.epochs.push(stats);
    }

    let mut adam = Adam::new(&model);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let lr = cfg.learning_rate_at(epoch);
        let (mut task_sum, mut olr_sum, mut olr_count) = (0.0, 0.0, 0usize);
        for batch in order.chunks(cfg.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            let mut pairs = Vec::with_capacity(batch.len());
            for &i in batch {
                pairs.push(draw_pair(i, &mut rng)?);
            }
            let mut terms = Vec::with_capacity(2 * batch.len());
            let mut olr_slots = Vec::new();
            for (&i, pair) in batch.iter().zip(&pairs) {
                let ex = &data.examples[i];
                terms.push((scale, task_term(cfg, &ex.ids, ex.target)));
                match pair {
                    Some((a, b)) if cfg.lambda > 0.0 => {
                        olr_slots.push(terms.len());
                        terms.push((cfg.lambda * scale, LossTerm::Olr { a, b, target }));
                    }
                    Some((a, b)) => {
                        olr_sum += model.olr_loss(a, b, target)?;
                        olr_count += 1;
                    }
                    None => log.missing_pairs += 1,
                }
            }
            let (report, grads) = model.backward(&terms)?;
            for (k, value) in report.terms.iter().enumerate() {
                if olr_slots.contains(&k) {
                    olr_sum += value;
                    olr_count += 1;
                } else {
                    task_sum += value;
                }
            }
            if !report.total.is_finite() {
                return Err(diverged(epoch, format!("non-finite batch loss {}", report.total)));
            }
            let step = match cfg.optimizer {
                OptimizerKind::Adam => adam.step(&mut model, &grads, lr, cfg.clip()),
                OptimizerKind::Sgd => sgd_step(&mut model, &grads, lr, cfg.clip()),
            };
            step.map_err(|e| diverged(epoch, e.to_string()))?;
        }
        let stats = EpochStats {
            epoch,
            task_loss: task_sum / data.len() as f64,
            olr_loss: olr_sum / olr_count.max(1) as f64,
            train_acc: train_accuracy(cfg, &model, data)?,
        };
        on_epoch(&stats);
        log.epochs.push(stats);

        let objective = stats.task_loss + cfg.lambda * stats.olr_loss;
        if !objective.is_finite() {
            return Err(diverged(epoch, format!("non-finite epoch loss {objective}")));
        }
        if objective < best * (1.0 - cfg.plateau_tolerance) {
            best = objective;
            since_best = 0;
        } else {
            since_best += 1;
        }
        let accurate = cfg.task == Task::TreeLm || stats.train_acc == 1.0;
        if accurate && since_best >= cfg.plateau_window {
            log.stop = StopReason::Converged;
            break;
        }
    }
    Ok((model, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{build_datasets, build_wiener_dataset};

    fn tiny(lambda: f64) -> ExperimentConfig {
        ExperimentConfig {
            n: 6,
            train_size: 12,
            test_size: 4,
            hidden_width: 12,
            embed_width: 4,
            lambda,
            epochs: 6,
            batch_size: 4,
            lr_schedule: crate::pipeline::LrSchedule::Constant,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn lambda_does_not_change_the_starting_point() {
        let (data, _) = build_wiener_dataset(&tiny(0.0)).unwrap();
        let (_, base) = train(&tiny(0.0), &data, None).unwrap();
        let (_, olr) = train(&tiny(1.0), &data, None).unwrap();
        assert_eq!(base.epochs[0], olr.epochs[0]);
        assert_eq!(base.epochs[0].epoch, 0);
        assert_ne!(base.epochs[1].task_loss, olr.epochs[1].task_loss);
    }

    #[test]
    fn training_is_deterministic_and_reduces_loss() {
        let cfg = ExperimentConfig { epochs: 40, ..tiny(1.0) };
        let (data, _) = build_wiener_dataset(&cfg).unwrap();
        let (m1, log1) = train(&cfg, &data, None).unwrap();
        let (m2, log2) = train(&cfg, &data, None).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(log1, log2);
        assert!(log1.epochs.last().unwrap().task_loss < 0.5 * log1.epochs[0].task_loss);
        assert_eq!(log1.epochs[3].to_string().split(' ').count(), 4);
        assert!(log1.epochs[3].to_string().starts_with("epoch=3 task_loss="));
    }

    #[test]
    fn subgraph_pairs_and_lm_task_train() {
        let cfg = ExperimentConfig {
            task: Task::TreeLm,
            pair_source: PairSource::DfsSubgraph,
            olr_mode: crate::pipeline::OlrMode::Hidden,
            ..tiny(0.5)
        };
        let (data, _) = build_datasets(&cfg).unwrap();
        let (_, log) = train(&cfg, &data, None).unwrap();
        assert_eq!(log.epochs.len(), 7);
        assert!(log.epochs.iter().all(|e| e.task_loss.is_finite() && e.olr_loss >= 0.0));
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = ExperimentConfig {
            optimizer: OptimizerKind::Sgd,
            learning_rate: 1e200,
            clip_norm: 0.0,
            ..tiny(1.0)
        };
        let (data, _) = build_wiener_dataset(&cfg).unwrap();
        assert!(matches!(train(&cfg, &data, None), Err(PipelineError::Diverged { .. })));
    }
}
