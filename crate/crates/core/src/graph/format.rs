//! Line-oriented graph files.
//!
//! ```text
//! g <id> <n> <i-j>,<i-j>,... [L <label0>,<label1>,...]
//! ```
//!
//! Node indices are 0-based and every edge is written with the smaller index
//! first. A graph without edges writes `-` in the edge field. Blank lines and
//! lines starting with `#` are skipped; anything else that does not parse is
//! an error carrying its 1-based line number.

use std::io::{self, BufRead, Write};

use super::{Edge, Graph, GraphError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphRecord {
    pub id: String,
    pub graph: Graph,
}

pub fn format_graph_line(id: &str, g: &Graph) -> String {
    let edges = g.edges();
    let edge_field = if edges.is_empty() {
        "-".to_string()
    } else {
        edges
            .iter()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut line = format!("g {id} {} {edge_field}", g.node_count());
    if let Some(labels) = g.node_labels() {
        line.push_str(" L ");
        line.push_str(&labels.join(","));
    }
    line
}

/// Parses one graph line; `line_no` is only used in error messages.
pub fn parse_graph_line(line: &str, line_no: usize) -> Result<GraphRecord, GraphError> {
    let err = |message: String| GraphError::Parse { line: line_no, message };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if !(fields.len() == 4 || fields.len() == 6) || fields[0] != "g" {
        return Err(err(format!("expected `g <id> <n> <edges> [L <labels>]`, got {line:?}")));
    }
    let id = fields[1].to_string();
    let n: usize = fields[2]
        .parse()
        .map_err(|_| err(format!("bad node count {:?}", fields[2])))?;
    let mut edges: Vec<Edge> = Vec::new();
    if fields[3] != "-" {
        for item in fields[3].split(',') {
            let (a, b) = item
                .split_once('-')
                .ok_or_else(|| err(format!("bad edge {item:?}")))?;
            let a: usize = a.parse().map_err(|_| err(format!("bad edge {item:?}")))?;
            let b: usize = b.parse().map_err(|_| err(format!("bad edge {item:?}")))?;
            if a >= b {
                return Err(err(format!("edge {item:?} is not canonical (need i < j)")));
            }
            edges.push((a, b));
        }
    }
    let mut graph = Graph::from_edges(n, &edges).map_err(|e| err(e.to_string()))?;
    if fields.len() == 6 {
        if fields[4] != "L" {
            return Err(err(format!("expected label marker `L`, got {:?}", fields[4])));
        }
        let labels: Vec<&str> = fields[5].split(',').collect();
        if labels.iter().any(|l| l.is_empty()) {
            return Err(err("empty node label".to_string()));
        }
        graph = graph.with_node_labels(labels).map_err(|e| err(e.to_string()))?;
    }
    Ok(GraphRecord { id, graph })
}

pub fn parse_graph_file<R: BufRead>(reader: R) -> Result<Vec<GraphRecord>, GraphError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| GraphError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(parse_graph_line(trimmed, i + 1)?);
    }
    Ok(out)
}

pub fn write_graph_file<W: Write>(mut writer: W, records: &[GraphRecord]) -> io::Result<()> {
    for r in records {
        writeln!(writer, "{}", format_graph_line(&r.id, &r.graph))?;
    }
    Ok(())
}
