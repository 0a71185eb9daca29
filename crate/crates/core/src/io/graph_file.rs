//! Line-oriented graph files:
//!
//! ```text
//! # comment
//! vertex a
//! vertex b
//! edge e1 a b length=1.0 kinetic=1 potential=poly:0,4,-4
//! ```
//!
//! `kinetic` defaults to 1 and `potential` to `poly:0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Error;
use crate::lagrangian::{EdgeLagrangian, GraphLagrangian};
use crate::metric_graph::{Edge, EdgeId, MetricGraph, VertexId};

#[derive(Clone, Debug)]
pub struct GraphSpec {
    pub graph: MetricGraph,
    pub lagrangian: GraphLagrangian,
}

impl GraphSpec {
    pub fn emit(&self) -> String {
        emit_graph_spec(&self.graph, &self.lagrangian)
    }
}

struct EdgeLine {
    line: usize,
    id: String,
    ends: [String; 2],
    length: f64,
    kinetic: f64,
    potential: Vec<f64>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_float(line: usize, key: &str, text: &str) -> Result<f64, Error> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_error(line, format!("{key}: `{text}` is not a finite number")))
}

fn parse_edge(line: usize, tokens: &[&str]) -> Result<EdgeLine, Error> {
    if tokens.len() < 4 {
        return Err(parse_error(line, "expected `edge <name> <v0> <v1> length=<float> ...`"));
    }
    let mut length = None;
    let mut kinetic = None;
    let mut potential = None;
    for tok in &tokens[4..] {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_error(line, format!("expected key=value, got `{tok}`")))?;
        let dup = || parse_error(line, format!("duplicate key `{key}`"));
        match key {
            "length" => {
                if length.replace(parse_float(line, key, value)?).is_some() {
                    return Err(dup());
                }
            }
            "kinetic" => {
                if kinetic.replace(parse_float(line, key, value)?).is_some() {
                    return Err(dup());
                }
            }
            "potential" => {
                let coeffs = value
                    .strip_prefix("poly:")
                    .ok_or_else(|| parse_error(line, format!("potential must be `poly:<c0>,...`, got `{value}`")))?;
                let parsed = coeffs
                    .split(',')
                    .map(|c| parse_float(line, "potential", c))
                    .collect::<Result<Vec<_>, _>>()?;
                if potential.replace(parsed).is_some() {
                    return Err(dup());
                }
            }
            other => return Err(parse_error(line, format!("unknown key `{other}`"))),
        }
    }
    Ok(EdgeLine {
        line,
        id: tokens[1].to_string(),
        ends: [tokens[2].to_string(), tokens[3].to_string()],
        length: length.ok_or_else(|| parse_error(line, "missing `length=`"))?,
        kinetic: kinetic.unwrap_or(1.0),
        potential: potential.unwrap_or_else(|| vec![0.0]),
    })
}

/// Parses a graph file, collecting every syntax error before giving up.
/// Structural problems (lengths, connectivity) are left to
/// [`MetricGraph::validate`]; Lagrangian compatibility is checked here.
pub fn parse_graph_spec(text: &str) -> Result<GraphSpec, Vec<Error>> {
    let mut errors = Vec::new();
    let mut vertices: Vec<(usize, String)> = Vec::new();
    let mut edges: Vec<EdgeLine> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "vertex" if tokens.len() == 2 => vertices.push((line, tokens[1].to_string())),
            "vertex" => errors.push(parse_error(line, "expected `vertex <name>`")),
            "edge" => match parse_edge(line, &tokens) {
                Ok(e) => edges.push(e),
                Err(e) => errors.push(e),
            },
            other => errors.push(parse_error(line, format!("unknown directive `{other}`"))),
        }
    }

    let mut seen = BTreeSet::new();
    for (line, v) in &vertices {
        if !seen.insert(v.as_str()) {
            errors.push(parse_error(*line, format!("duplicate vertex `{v}`")));
        }
    }
    let mut seen_edges = BTreeSet::new();
    for e in &edges {
        if !seen_edges.insert(e.id.as_str()) {
            errors.push(parse_error(e.line, format!("duplicate edge `{}`", e.id)));
        }
        for end in &e.ends {
            if !seen.contains(end.as_str()) {
                errors.push(parse_error(e.line, format!("unknown vertex `{end}`")));
            }
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|e| match e {
            Error::Parse { line, .. } => *line,
            _ => 0,
        });
        return Err(errors);
    }

    let graph = MetricGraph::new(
        vertices.iter().map(|(_, v)| VertexId::new(v.as_str())),
        edges
            .iter()
            .map(|e| Edge::new(&e.id, &e.ends[0], &e.ends[1], e.length))
            .collect(),
    );
    let per_edge: BTreeMap<EdgeId, EdgeLagrangian> = edges
        .iter()
        .map(|e| {
            (
                EdgeId::new(e.id.as_str()),
                EdgeLagrangian::mechanical(e.kinetic, e.potential.clone()),
            )
        })
        .collect();
    let lagrangian = GraphLagrangian::new(&graph, per_edge).map_err(|e| vec![e])?;
    Ok(GraphSpec { graph, lagrangian })
}

pub fn load_graph_spec(path: &Path) -> Result<GraphSpec, Vec<Error>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![Error::Io(e)])?;
    parse_graph_spec(&text)
}

/// Canonical text form; floats use the shortest representation that reads
/// back to the same value.
pub fn emit_graph_spec(graph: &MetricGraph, gl: &GraphLagrangian) -> String {
    let mut out = String::new();
    for v in graph.vertices() {
        let _ = writeln!(out, "vertex {v}");
    }
    for e in graph.edges() {
        let _ = write!(
            out,
            "edge {} {} {} length={:?}",
            e.id, e.endpoint0, e.endpoint1, e.length
        );
        if let Ok(lag) = gl.edge(&e.id) {
            let coeffs: Vec<String> = lag.potential.coeffs().iter().map(|c| format!("{c:?}")).collect();
            let _ = write!(out, " kinetic={:?} potential=poly:{}", lag.kinetic, coeffs.join(","));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const G2: &str = "\
# two unit edges
vertex a
vertex b
edge e1 a b length=1.0 potential=poly:0
edge e2 a b length=1.0 kinetic=1 potential=poly:0,4,-4   # bump
";

    #[test]
    fn minimal_spec() {
        let spec = parse_graph_spec("vertex a\nvertex b\nedge e1 a b length=1.0 potential=poly:0\n").unwrap();
        assert_eq!(spec.graph.edges().len(), 1);
        assert!(spec.graph.is_usable());
        let lag = spec.lagrangian.edge(&"e1".into()).unwrap();
        assert_eq!(lag.kinetic, 1.0);
        assert_eq!(lag.potential_at(0.3), 0.0);
    }

    #[test]
    fn bump_spec_round_trips() {
        let spec = parse_graph_spec(G2).unwrap();
        let lag = spec.lagrangian.edge(&"e2".into()).unwrap();
        assert_eq!(lag.potential_at(0.5), 1.0);
        assert_eq!(lag.potential_at(1.0), 0.0);
        let text = spec.emit();
        let again = parse_graph_spec(&text).unwrap();
        assert_eq!(again.emit(), text);
        assert_eq!(again.graph.edges(), spec.graph.edges());
        assert_eq!(again.graph.vertices(), spec.graph.vertices());
        assert_eq!(again.lagrangian, spec.lagrangian);
    }

    #[test]
    fn mismatch_reports_both_values() {
        let text = "vertex a\nvertex b\nedge e1 a b length=1 potential=poly:1\nedge e2 a b length=1 potential=poly:0\n";
        let errs = parse_graph_spec(text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].to_string(), "L mismatch at vertex a: -1 vs -0");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "vertex a\nvertex\nedge e1 a c length=1\nedge e2 a a length=x\nfoo\n";
        let errs = parse_graph_spec(text).unwrap_err();
        let lines: Vec<usize> = errs
            .iter()
            .map(|e| match e {
                Error::Parse { line, .. } => *line,
                _ => 0,
            })
            .collect();
        assert_eq!(lines, vec![2, 3, 4, 5]);
        assert!(errs[1].to_string().contains("unknown vertex `c`"));
    }

    #[test]
    fn scientific_notation() {
        let spec = parse_graph_spec("vertex a\nvertex b\nedge e a b length=2.5e-1 kinetic=1E0\n").unwrap();
        assert_eq!(spec.graph.edges()[0].length, 0.25);
    }
}
