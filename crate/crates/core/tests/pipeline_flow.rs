use std::collections::{HashMap, HashSet};

use orderless::dfs::is_valid_ordering;
use orderless::graph::{parse_graph_file, write_graph_file, Graph};
use orderless::pipeline::{
    build_datasets, dataset_from_graphs, evaluate_generation, evaluate_regression, filter_records, generate_graphs,
    precompute_trajectories, read_trajectory_file, sample_olr_pair, train, ExperimentConfig, PairInput, Task,
};
use orderless::recurrent::{read_checkpoint, write_checkpoint};

fn retention_corpus() -> Vec<orderless::graph::GraphRecord> {
    let cfg = ExperimentConfig::default();
    generate_graphs(&cfg, 1000, "tree", 2024).unwrap()
}

/// Pinned so that changes to the samplers or the cut constructions show up.
#[test]
fn retention_of_ten_node_trees_is_pinned() {
    let graphs = retention_corpus();
    let (records, summary) = precompute_trajectories(&graphs, 10, 7, std::io::sink()).unwrap();
    assert_eq!(summary.written + summary.skipped.len(), 1000);
    let (kept, filter) = filter_records(records, 10);
    assert!(kept.iter().all(|r| r.trajectories().len() >= 10));
    assert_eq!((summary.written, summary.skipped.len()), (980, 20));
    assert_eq!((filter.kept, filter.dropped), (203, 777));
    assert_eq!(filter.retention(), 203.0 / 980.0);
    // corpus-level fraction, counting graphs without any set as dropped
    assert_eq!(filter.kept as f64 / 1000.0, 0.203);
}

#[test]
fn trajectory_files_round_trip_and_are_reproducible() {
    let graphs = retention_corpus()[..60].to_vec();
    let mut first = Vec::new();
    let (records, _) = precompute_trajectories(&graphs, 10, 3, &mut first).unwrap();
    let mut second = Vec::new();
    precompute_trajectories(&graphs, 10, 3, &mut second).unwrap();
    assert_eq!(first, second);
    let by_id: HashMap<String, Graph> = graphs.iter().map(|r| (r.id.clone(), r.graph.clone())).collect();
    let loaded = read_trajectory_file(&first[..], &by_id).unwrap();
    assert_eq!(loaded, records);
    for r in &loaded {
        let g = &by_id[r.graph_id()];
        assert!(r.trajectories().iter().all(|t| is_valid_ordering(g, t.visit()) && t.last() == Some(r.common_end())));
    }
}

#[test]
fn graph_files_feed_datasets_and_training() {
    let cfg = ExperimentConfig {
        n: 7,
        train_size: 16,
        test_size: 8,
        hidden_width: 10,
        embed_width: 4,
        epochs: 8,
        batch_size: 4,
        ..ExperimentConfig::default()
    };
    let graphs = generate_graphs(&cfg, 16, "g", 5).unwrap();
    let mut file = Vec::new();
    write_graph_file(&mut file, &graphs).unwrap();
    let graphs = parse_graph_file(&file[..]).unwrap();
    let (records, _) = precompute_trajectories(&graphs, 10, 1, std::io::sink()).unwrap();
    let data = dataset_from_graphs(&cfg, &graphs, "train").unwrap();
    assert!(data.examples.iter().all(|e| e.target == e.graph.wiener_index().unwrap() as f64));

    let (model, log) = train(&cfg, &data, Some(&records)).unwrap();
    assert_eq!(log.epochs.len(), cfg.epochs + 1);
    let mut text = Vec::new();
    write_checkpoint(&model, &mut text).unwrap();
    let restored = read_checkpoint(&text[..]).unwrap();
    assert_eq!(restored, model);
    assert_eq!(evaluate_regression(&restored, &data).unwrap(), evaluate_regression(&model, &data).unwrap());

    let record = &records[0];
    let (a, b) = sample_olr_pair(PairInput::Record(record), &cfg, &data.vocab, 3).unwrap();
    assert_ne!(a, b);
}

#[test]
fn language_model_training_and_generation() {
    let cfg = ExperimentConfig {
        task: Task::TreeLm,
        n: 6,
        train_size: 20,
        test_size: 10,
        hidden_width: 12,
        embed_width: 4,
        epochs: 30,
        batch_size: 5,
        ..ExperimentConfig::default()
    };
    let (train_set, _) = build_datasets(&cfg).unwrap();
    let (model, log) = train(&cfg, &train_set, None).unwrap();
    assert!(log.epochs.last().unwrap().task_loss < log.epochs[0].task_loss);
    let reference: HashSet<String> = train_set.examples.iter().map(|e| e.tokens.to_canonical_string()).collect();
    let m = evaluate_generation(&model, &reference, &[10, 50], 50, 40, 1.0, 8).unwrap();
    assert!((0.0..=1.0).contains(&m.validity) && (0.0..=1.0).contains(&m.novelty));
    assert_eq!(m, evaluate_generation(&model, &reference, &[10, 50], 50, 40, 1.0, 8).unwrap());
}
