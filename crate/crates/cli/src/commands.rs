//! One function per subcommand. Summaries go to stdout, diagnostics to stderr.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use orderless::codec::{decode, detokenize, EOS};
use orderless::dfs::{enumerate_orderings, enumerate_orderings_ending_at, structure_invariance_gap};
use orderless::graph::{parse_graph_file, write_graph_file, ConnectivityClass, Graph, GraphRecord};
use orderless::pipeline::{
    build_datasets, dataset_from_graphs, derive_seed, evaluate_generation, evaluate_regression, filter_records,
    generate_graphs, precompute_trajectories, read_trajectory_file, train_with_log, write_metrics,
    write_trajectory_file, Dataset, ExperimentConfig, GraphKind, Task, TrajectoryRecord,
};
use orderless::recurrent::{read_checkpoint, sample_sequence, save_checkpoint, RecurrentModel};

use crate::error::Failure;
use crate::{ConfigArgs, OracleMode};

type Outcome = Result<(), Failure>;

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::data(e.to_string()).in_file(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::runtime(e.to_string()).in_file(path))
}

fn write_failed(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::runtime(e.to_string()).in_file(path)
}

fn read_graphs(path: &Path) -> Result<Vec<GraphRecord>, Failure> {
    parse_graph_file(open(path)?).map_err(|e| Failure::from(e).in_file(path))
}

fn read_model(path: &Path) -> Result<RecurrentModel, Failure> {
    read_checkpoint(open(path)?).map_err(|e| Failure::data(e.to_string()).in_file(path))
}

/// Defaults, then the config file, then `--set` overrides, then `--seed`.
pub fn resolve_config(args: &ConfigArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::data(e.to_string()).in_file(path))?;
            ExperimentConfig::parse(&text).map_err(|e| Failure::from(e).in_file(path))?
        }
        None => ExperimentConfig::default(),
    };
    for item in &args.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--set expects KEY=VALUE, got `{item}`")))?;
        match cfg.set(key.trim(), value) {
            Ok(true) => {}
            Ok(false) => return Err(Failure::usage(format!("--set: unknown config key `{}`", key.trim()))),
            Err(message) => return Err(Failure::usage(format!("--set: {message}"))),
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_metrics(metrics: &[(String, f64)], out: Option<&Path>) -> Outcome {
    write_metrics(std::io::stdout().lock(), metrics)?;
    if let Some(path) = out {
        write_metrics(create(path)?, metrics).map_err(|e| Failure::from(e).in_file(path))?;
    }
    Ok(())
}

pub fn gen_graphs(n: usize, count: usize, extra_edges: usize, seed: u64, prefix: &str, out: &Path) -> Outcome {
    if n == 0 {
        return Err(Failure::usage("--n must be positive"));
    }
    let available = n * (n - 1) / 2 - (n - 1);
    if extra_edges > available {
        return Err(Failure::usage(format!(
            "--extra-edges {extra_edges} exceeds the {available} non-tree edges of a {n}-node graph"
        )));
    }
    if prefix.is_empty() || prefix.contains(char::is_whitespace) {
        return Err(Failure::usage("--prefix must be non-empty and contain no whitespace"));
    }
    let cfg = ExperimentConfig {
        graph_kind: if extra_edges == 0 { GraphKind::Tree } else { GraphKind::General },
        n,
        extra_edges,
        ..ExperimentConfig::default()
    };
    let graphs = generate_graphs(&cfg, count, prefix, seed)?;
    let mut file = create(out)?;
    write_graph_file(&mut file, &graphs)
        .and_then(|()| file.flush())
        .map_err(write_failed(out))?;
    println!("graphs={count} n={n} extra_edges={extra_edges} seed={seed}");
    Ok(())
}

pub fn trajectories(input: &Path, count: usize, seed: u64, out: &Path) -> Outcome {
    if count < 2 {
        return Err(Failure::usage("--count must be at least 2"));
    }
    let graphs = read_graphs(input)?;
    let (_, summary) = precompute_trajectories(&graphs, count, seed, create(out)?)?;
    for (id, reason) in &summary.skipped {
        println!("skipped {id}: {reason}");
    }
    println!("graphs={} written={} skipped={}", graphs.len(), summary.written, summary.skipped.len());
    Ok(())
}

fn graph_map(graphs: impl IntoIterator<Item = (String, Graph)>) -> HashMap<String, Graph> {
    graphs.into_iter().collect()
}

fn read_records(path: &Path, graphs: &HashMap<String, Graph>) -> Result<Vec<TrajectoryRecord>, Failure> {
    read_trajectory_file(open(path)?, graphs).map_err(|e| Failure::from(e).in_file(path))
}

pub fn filter(graphs: &Path, input: &Path, min: usize, out: &Path) -> Outcome {
    let by_id = graph_map(read_graphs(graphs)?.into_iter().map(|r| (r.id, r.graph)));
    let records = read_records(input, &by_id)?;
    let (kept, summary) = filter_records(records, min);
    write_trajectory_file(create(out)?, &kept).map_err(|e| Failure::from(e).in_file(out))?;
    println!("kept={} dropped={} retention={:?}", summary.kept, summary.dropped, summary.retention());
    Ok(())
}

/// Graph files are serialized under one split tag, so a file yields the same
/// sequences in `train` and `eval` for a given seed.
fn load_dataset(cfg: &ExperimentConfig, path: &Path) -> Result<Dataset, Failure> {
    let graphs = read_graphs(path)?;
    if graphs.is_empty() {
        return Err(Failure::data("no graphs").in_file(path));
    }
    dataset_from_graphs(cfg, &graphs, "file").map_err(|e| Failure::from(e).in_file(path))
}

pub fn train(
    args: &ConfigArgs,
    data: Option<&Path>,
    trajectories: Option<&Path>,
    out_model: &Path,
    log: Option<&Path>,
) -> Outcome {
    let cfg = resolve_config(args)?;
    let train_set = match data {
        Some(path) => load_dataset(&cfg, path)?,
        None => build_datasets(&cfg)?.0,
    };
    let records = match trajectories {
        Some(path) => {
            let by_id = graph_map(train_set.examples.iter().map(|e| (e.graph_id.clone(), e.graph.clone())));
            Some(read_records(path, &by_id)?)
        }
        None => None,
    };

    let mut log_file = log.map(create).transpose()?;
    let mut log_error = None;
    if let (Some(file), Some(path)) = (log_file.as_mut(), log) {
        let header: String = cfg.to_text().lines().map(|l| format!("# {l}\n")).collect();
        file.write_all(header.as_bytes()).map_err(write_failed(path))?;
    }
    let (model, train_log) = train_with_log(&cfg, &train_set, records.as_deref(), |stats| {
        if let Some(file) = log_file.as_mut() {
            if let Err(e) = writeln!(file, "{stats}") {
                log_error.get_or_insert(e);
            }
        }
    })?;
    if let (Some(file), Some(path)) = (log_file.as_mut(), log) {
        if let Some(e) = log_error {
            return Err(write_failed(path)(e));
        }
        writeln!(file, "stop={:?} missing_pairs={}", train_log.stop, train_log.missing_pairs)
            .and_then(|()| file.flush())
            .map_err(write_failed(path))?;
    }
    save_checkpoint(&model, out_model).map_err(|e| Failure::runtime(e.to_string()).in_file(out_model))?;

    let last = train_log.epochs.last().expect("epoch 0 is always logged");
    println!(
        "stop={:?} epochs={} task_loss={:?} olr_loss={:?} train_acc={:?} missing_pairs={}",
        train_log.stop, last.epoch, last.task_loss, last.olr_loss, last.train_acc, train_log.missing_pairs
    );
    Ok(())
}

fn check_vocab(model: &RecurrentModel, data: &Dataset) -> Outcome {
    if model.vocab() != &data.vocab {
        return Err(Failure::data(format!(
            "vocabulary mismatch: model has {} tokens ({:?}), data uses {} ({:?})",
            model.vocab_size(),
            model.vocab().mode(),
            data.vocab.size(),
            data.vocab.mode()
        )));
    }
    Ok(())
}

fn canonical_strings(data: &Dataset) -> HashSet<String> {
    data.examples.iter().map(|e| e.tokens.to_canonical_string()).collect()
}

/// Regression checkpoints report MAE and rounded accuracy; language models
/// report validity, unique@K and novelty against `reference`, the `--data`
/// graphs, or the generated training split, in that order of preference.
pub fn eval(
    args: &ConfigArgs,
    model_path: &Path,
    data: Option<&Path>,
    reference: Option<&Path>,
    metrics_out: Option<&Path>,
) -> Outcome {
    let cfg = resolve_config(args)?;
    let model = read_model(model_path)?;
    let (eval_set, train_set) = match data {
        Some(path) => (load_dataset(&cfg, path)?, None),
        None => {
            let (train, test) = build_datasets(&cfg)?;
            (test, Some(train))
        }
    };
    check_vocab(&model, &eval_set)?;
    let metrics = match cfg.task {
        Task::WienerRegression => evaluate_regression(&model, &eval_set)?.to_pairs(),
        Task::TreeLm => {
            let seen = match (reference, train_set) {
                (Some(path), _) => canonical_strings(&load_dataset(&cfg, path)?),
                (None, Some(train)) => canonical_strings(&train),
                (None, None) => canonical_strings(&eval_set),
            };
            let seed = derive_seed(cfg.seed, "eval/generation");
            evaluate_generation(&model, &seen, &cfg.unique_k, cfg.sample_count, cfg.max_len, cfg.temperature, seed)?
                .to_pairs()
        }
    };
    print_metrics(&metrics, metrics_out)
}

/// One line per sample: its codec string, or `invalid` when it lacks `EOS`
/// or does not decode to a tree.
pub fn generate(args: &ConfigArgs, model_path: &Path, count: Option<usize>, out: Option<&Path>) -> Outcome {
    let cfg = resolve_config(args)?;
    let model = read_model(model_path)?;
    let count = count.unwrap_or(cfg.sample_count);
    let mut lines = Vec::with_capacity(count);
    let mut valid = 0;
    for i in 0..count {
        let seed = derive_seed(cfg.seed, &format!("generate/{i}"));
        let ids = sample_sequence(&model, cfg.max_len, cfg.temperature, seed)?;
        let text = ids
            .contains(&EOS)
            .then(|| detokenize(&ids, model.vocab()).ok())
            .flatten()
            .filter(|ts| decode(ts).is_ok())
            .map(|ts| ts.to_canonical_string());
        valid += usize::from(text.is_some());
        lines.push(text.unwrap_or_else(|| "invalid".into()));
    }
    let body: String = lines.iter().map(|l| format!("{l}\n")).collect();
    match out {
        Some(path) => {
            let mut file = create(path)?;
            file.write_all(body.as_bytes())
                .and_then(|()| file.flush())
                .map_err(write_failed(path))?;
        }
        None => print!("{body}"),
    }
    eprintln!("samples={count} valid={valid}");
    Ok(())
}

fn print_orderings(id: &str, label: &str, orderings: &std::collections::BTreeSet<Vec<usize>>) {
    println!("# {id}{label} orderings={}", orderings.len());
    for seq in orderings {
        let text: Vec<String> = seq.iter().map(usize::to_string).collect();
        println!("{}", text.join(" "));
    }
}

pub fn oracle(
    args: &ConfigArgs,
    input: &Path,
    mode: OracleMode,
    end: Option<usize>,
    model: Option<&Path>,
    bound: Option<usize>,
) -> Outcome {
    let cfg = resolve_config(args)?;
    let bound = bound.unwrap_or(cfg.oracle_max_nodes);
    let graphs = read_graphs(input)?;
    match mode {
        OracleMode::Enumerate => {
            for r in &graphs {
                print_orderings(&r.id, "", &enumerate_orderings(&r.graph, bound)?);
            }
        }
        OracleMode::EndAt => {
            let end = end.ok_or_else(|| Failure::usage("--mode end-at needs --end"))?;
            for r in &graphs {
                if end >= r.graph.node_count() {
                    return Err(Failure::usage(format!(
                        "--end {end} is not a node of {} ({} nodes)",
                        r.id,
                        r.graph.node_count()
                    )));
                }
                print_orderings(&r.id, &format!(" end={end}"), &enumerate_orderings_ending_at(&r.graph, end, bound)?);
            }
        }
        OracleMode::InvarianceGap => {
            let path = model.ok_or_else(|| Failure::usage("--mode invariance-gap needs --model"))?;
            let model = read_model(path)?;
            let mut total = 0.0;
            for r in &graphs {
                let gap = structure_invariance_gap(&model, &r.graph, cfg.olr_target(), bound)
                    .map_err(|e| Failure::from(e).in_file(input))?;
                println!("{} gap={gap:?}", r.id);
                total += gap;
            }
            if !graphs.is_empty() {
                println!("mean_gap={:?}", total / graphs.len() as f64);
            }
        }
    }
    Ok(())
}

pub fn wiener(input: &Path, out: Option<&Path>) -> Outcome {
    let graphs = read_graphs(input)?;
    let mut body = String::new();
    for r in &graphs {
        let w = r
            .graph
            .wiener_index()
            .map_err(|e| Failure::data(format!("graph {}: {e}", r.id)).in_file(input))?;
        body.push_str(&format!("{}\t{w}\n", r.id));
    }
    match out {
        Some(path) => {
            let mut file = create(path)?;
            file.write_all(body.as_bytes())
                .and_then(|()| file.flush())
                .map_err(write_failed(path))?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

/// Counts per edge-connectivity class. Single-node graphs have no class and
/// are counted separately.
pub fn stats(input: &Path, metrics_out: Option<&Path>) -> Outcome {
    let graphs = read_graphs(input)?;
    if graphs.is_empty() {
        return Err(Failure::data("no graphs").in_file(input));
    }
    let mut classes = [0usize; 3];
    let (mut single, mut trees, mut nodes, mut edges) = (0usize, 0usize, 0usize, 0usize);
    for r in &graphs {
        let g = &r.graph;
        if !g.is_connected() {
            return Err(Failure::data(format!("graph {} is not connected", r.id)).in_file(input));
        }
        nodes += g.node_count();
        edges += g.edge_count();
        trees += usize::from(g.is_tree());
        if g.node_count() < 2 {
            single += 1;
            continue;
        }
        let slot = match g.edge_connectivity_class()? {
            ConnectivityClass::OneEdgeConnected => 0,
            ConnectivityClass::TwoEdgeConnected => 1,
            ConnectivityClass::Higher => 2,
        };
        classes[slot] += 1;
    }
    let count = graphs.len() as f64;
    let metrics = vec![
        ("graphs".to_string(), count),
        ("mean_nodes".into(), nodes as f64 / count),
        ("mean_edges".into(), edges as f64 / count),
        ("trees".into(), trees as f64),
        ("single_node".into(), single as f64),
        ("one_edge_connected".into(), classes[0] as f64),
        ("two_edge_connected".into(), classes[1] as f64),
        ("higher_edge_connected".into(), classes[2] as f64),
        ("one_edge_connected_fraction".into(), classes[0] as f64 / count),
    ];
    print_metrics(&metrics, metrics_out)
}
