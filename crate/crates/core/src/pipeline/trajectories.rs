//! Offline trajectory sets and their line-oriented file format.
//!
//! One record per line: `<graph_id>\t<canonical>\t<traj_1>|<traj_2>|...`.
//! Every sequence is a codec string whose node symbols are the graph's node
//! indices (`0-9A-Za-z`). Loading replays each string against its graph, so a
//! corrupted file fails to load instead of feeding bad pairs to training.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use super::{derive_seed, PipelineError};
use crate::codec::{encode_indices, symbol_index, TokenSequence};
use crate::dfs::{trajectory_set, Ordering};
use crate::graph::{Graph, GraphRecord};

/// Trajectories of one graph that all end at the same node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryRecord {
    graph_id: String,
    canonical: Ordering,
    trajectories: Vec<Ordering>,
}

impl TrajectoryRecord {
    /// Checks every ordering against `g`, a shared last node and pairwise distinctness.
    pub fn new(
        graph_id: impl Into<String>,
        g: &Graph,
        canonical: Ordering,
        trajectories: Vec<Ordering>,
    ) -> Result<TrajectoryRecord, String> {
        let graph_id = graph_id.into();
        if graph_id.is_empty() || graph_id.contains(char::is_whitespace) {
            return Err(format!("bad graph id `{graph_id}`"));
        }
        for o in std::iter::once(&canonical).chain(&trajectories) {
            if Ordering::from_sequence(g, o.visit()).as_ref() != Ok(o) {
                return Err(format!("sequence {:?} is not a valid ordering of the graph", o.visit()));
            }
        }
        let first = trajectories.first().ok_or("record has no trajectories")?;
        if trajectories.iter().any(|t| t.last() != first.last()) {
            return Err("trajectories do not share their final node".into());
        }
        let distinct: HashSet<&[usize]> = trajectories.iter().map(Ordering::visit).collect();
        if distinct.len() != trajectories.len() {
            return Err("trajectories are not pairwise distinct".into());
        }
        Ok(TrajectoryRecord {
            graph_id,
            canonical,
            trajectories,
        })
    }

    pub fn graph_id(&self) -> &str {
        &self.graph_id
    }

    pub fn canonical(&self) -> &Ordering {
        &self.canonical
    }

    pub fn trajectories(&self) -> &[Ordering] {
        &self.trajectories
    }

    pub fn common_end(&self) -> usize {
        self.trajectories[0].last().expect("orderings are non-empty")
    }

    pub fn to_line(&self) -> Result<String, PipelineError> {
        let trajs: Vec<String> = self
            .trajectories
            .iter()
            .map(|t| Ok(encode_indices(t)?.to_canonical_string()))
            .collect::<Result<_, PipelineError>>()?;
        Ok(format!(
            "{}\t{}\t{}",
            self.graph_id,
            encode_indices(&self.canonical)?.to_canonical_string(),
            trajs.join("|")
        ))
    }
}

/// DFS from node 0 that always enters the lowest-numbered unvisited neighbor.
pub fn designated_ordering(g: &Graph) -> Result<Ordering, PipelineError> {
    g.require_connected()?;
    let n = g.node_count();
    let mut visited = vec![false; n];
    let mut seq = Vec::with_capacity(n);
    let mut stack = Vec::new();
    if n > 0 {
        visited[0] = true;
        seq.push(0);
        stack.push(0);
    }
    while let Some(&top) = stack.last() {
        match g.neighbors(top).iter().find(|&&w| !visited[w]) {
            Some(&w) => {
                visited[w] = true;
                seq.push(w);
                stack.push(w);
            }
            None => {
                stack.pop();
            }
        }
    }
    Ok(Ordering::from_sequence(g, &seq)?)
}

/// Records written and graphs skipped, with the reason for each skip.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrecomputeSummary {
    pub written: usize,
    pub skipped: Vec<(String, String)>,
}

/// Runs `trajectory_set` on every graph with a per-graph seed derived from
/// `(seed, graph id)` and writes one line per graph that admits a set.
pub fn precompute_trajectories(
    graphs: &[GraphRecord],
    count: usize,
    seed: u64,
    mut sink: impl Write,
) -> Result<(Vec<TrajectoryRecord>, PrecomputeSummary), PipelineError> {
    let mut records = Vec::new();
    let mut summary = PrecomputeSummary::default();
    for rec in graphs {
        let graph_seed = derive_seed(seed, &format!("trajectories/{}", rec.id));
        let built = trajectory_set(&rec.graph, count, graph_seed)
            .map_err(|e| e.to_string())
            .and_then(|trajs| {
                let canonical = designated_ordering(&rec.graph).map_err(|e| e.to_string())?;
                TrajectoryRecord::new(rec.id.clone(), &rec.graph, canonical, trajs)
            })
            .and_then(|r| r.to_line().map(|line| (r, line)).map_err(|e| e.to_string()));
        match built {
            Ok((record, line)) => {
                writeln!(sink, "{line}")?;
                records.push(record);
                summary.written += 1;
            }
            Err(reason) => summary.skipped.push((rec.id.clone(), reason)),
        }
    }
    sink.flush()?;
    Ok((records, summary))
}

pub fn write_trajectory_file(mut sink: impl Write, records: &[TrajectoryRecord]) -> Result<(), PipelineError> {
    for r in records {
        writeln!(sink, "{}", r.to_line()?)?;
    }
    sink.flush()?;
    Ok(())
}

/// Replays one codec string against `g`. The string must be exactly the
/// encoding of the ordering its symbols spell out.
fn parse_sequence(text: &str, g: &Graph) -> Result<Ordering, String> {
    let tokens = TokenSequence::parse(text).map_err(|e| e.to_string())?;
    let seq: Vec<usize> = tokens
        .node_symbols()
        .map(|s| symbol_index(s).ok_or_else(|| format!("`{s}` is not a node index symbol")))
        .collect::<Result<_, _>>()?;
    let ordering = Ordering::from_sequence(g, &seq).map_err(|e| format!("`{text}`: {e}"))?;
    if encode_indices(&ordering).map_err(|e| e.to_string())? != tokens {
        return Err(format!("`{text}` does not match the DFS tree of its visit order"));
    }
    Ok(ordering)
}

/// Loads and re-validates a trajectory file against the graphs it refers to.
pub fn read_trajectory_file(
    reader: impl BufRead,
    graphs: &HashMap<String, Graph>,
) -> Result<Vec<TrajectoryRecord>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| PipelineError::TrajectoryFile { line: i + 1, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, canonical, trajs] = fields[..] else {
            return Err(fail(format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        let g = graphs.get(id).ok_or_else(|| fail(format!("unknown graph id `{id}`")))?;
        let canonical = parse_sequence(canonical, g).map_err(fail)?;
        let trajectories = trajs
            .split('|')
            .map(|t| parse_sequence(t, g))
            .collect::<Result<Vec<_>, _>>()
            .map_err(fail)?;
        out.push(TrajectoryRecord::new(id, g, canonical, trajectories).map_err(fail)?);
    }
    Ok(out)
}

/// Kept and dropped counts of a filtering pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSummary {
    pub kept: usize,
    pub dropped: usize,
}

impl FilterSummary {
    /// Fraction of records kept; 1 for an empty input.
    pub fn retention(&self) -> f64 {
        let total = self.kept + self.dropped;
        if total == 0 {
            1.0
        } else {
            self.kept as f64 / total as f64
        }
    }
}

/// Keeps records with at least `min_trajectories` distinct trajectories.
pub fn filter_records(records: Vec<TrajectoryRecord>, min_trajectories: usize) -> (Vec<TrajectoryRecord>, FilterSummary) {
    let total = records.len();
    let kept: Vec<TrajectoryRecord> = records
        .into_iter()
        .filter(|r| r.trajectories.len() >= min_trajectories)
        .collect();
    let summary = FilterSummary {
        kept: kept.len(),
        dropped: total - kept.len(),
    };
    (kept, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfs::tests::six_node_example;
    use crate::graph::tests::path;
    use crate::graph::random_tree;

    fn example_record() -> GraphRecord {
        GraphRecord {
            id: "six_node_example".into(),
            graph: six_node_example(),
        }
    }

    fn graph_map(records: &[GraphRecord]) -> HashMap<String, Graph> {
        records.iter().map(|r| (r.id.clone(), r.graph.clone())).collect()
    }

    #[test]
    fn example_record_ends_at_d() {
        let mut out = Vec::new();
        let graphs = vec![example_record()];
        let found_d = (0..20u64).any(|seed| {
            out.clear();
            let (records, summary) = precompute_trajectories(&graphs, 10, seed, &mut out).unwrap();
            assert_eq!(summary.written, 1);
            records[0].trajectories().len() >= 2 && records[0].common_end() == 3
        });
        assert!(found_d);
        let back = read_trajectory_file(&out[..], &graph_map(&graphs)).unwrap();
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn path_graphs_are_skipped_with_reason() {
        let graphs = vec![GraphRecord {
            id: "p".into(),
            graph: path(5),
        }];
        let mut out = Vec::new();
        let (records, summary) = precompute_trajectories(&graphs, 10, 1, &mut out).unwrap();
        assert!(records.is_empty() && out.is_empty());
        assert_eq!(summary.skipped, vec![("p".to_string(), "graph admits no heuristic pair".to_string())]);
    }

    #[test]
    fn output_is_byte_identical_across_runs_and_round_trips() {
        let graphs: Vec<GraphRecord> = (0..30)
            .map(|i| GraphRecord {
                id: format!("t{i}"),
                graph: random_tree(10, i).unwrap(),
            })
            .collect();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let (records, _) = precompute_trajectories(&graphs, 10, 5, &mut a).unwrap();
        precompute_trajectories(&graphs, 10, 5, &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(read_trajectory_file(&a[..], &graph_map(&graphs)).unwrap(), records);
        let mut again = Vec::new();
        write_trajectory_file(&mut again, &records).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn corrupted_lines_fail_to_load() {
        let graphs = vec![example_record()];
        let map = graph_map(&graphs);
        let load = |text: &str| read_trajectory_file(text.as_bytes(), &map);
        assert!(load("six_node_example\t0(145)(2)3\t0(145)(2)3|0(2)(154)3\n").is_ok());
        // 2 is not adjacent to 1
        assert!(matches!(
            load("six_node_example\t0(145)(2)3\t0(12)(45)3\n"),
            Err(PipelineError::TrajectoryFile { line: 1, .. })
        ));
        // visit order fine, tree shape wrong
        assert!(load("six_node_example\t0(145)(2)3\t0(14)(5)(2)3\n").is_err());
        // different final nodes
        assert!(load("six_node_example\t0(145)(2)3\t0(145)(2)3|0(145)(3)2\n").is_err());
        // duplicates
        assert!(load("six_node_example\t0(145)(2)3\t0(145)(2)3|0(145)(2)3\n").is_err());
        assert!(load("nope\t0\t0\n").is_err());
        assert!(load("six_node_example\t0(145)(2)3\n").is_err());
    }

    #[test]
    fn filtering_reports_retention() {
        let g = six_node_example();
        let canonical = designated_ordering(&g).unwrap();
        let two = TrajectoryRecord::new(
            "a",
            &g,
            canonical.clone(),
            vec![
                Ordering::from_sequence(&g, &[0, 1, 4, 5, 2, 3]).unwrap(),
                Ordering::from_sequence(&g, &[0, 2, 1, 5, 4, 3]).unwrap(),
            ],
        )
        .unwrap();
        let (kept, s) = filter_records(vec![two.clone()], 1);
        assert_eq!((kept.len(), s.retention()), (1, 1.0));
        let (kept, s) = filter_records(vec![two], 10);
        assert_eq!((kept.len(), s.dropped, s.retention()), (0, 1, 0.0));
    }

    #[test]
    fn designated_ordering_is_lowest_first() {
        assert_eq!(designated_ordering(&six_node_example()).unwrap().visit(), &[0, 1, 4, 5, 2, 3]);
    }
}
