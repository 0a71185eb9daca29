//! CSV artifacts. Rows are sorted by `(edge_id, s)` with vertex states listed
//! once under their canonical point; offsets are rounded to 9 significant
//! digits, values are printed in shortest round-trip form.

use std::path::Path;

use crate::discretization::{Grid, GridFunction, StateId};
use crate::error::{Error, Result};
use crate::metric_graph::GraphPoint;
use crate::viscosity::ViscosityReport;
use crate::weak_kam::{AubrySet, BarrierMatrix, ConvergenceTable};

/// `s` rounded to 9 significant digits.
pub fn format_offset(s: f64) -> String {
    let rounded: f64 = format!("{s:.8e}").parse().unwrap_or(s);
    format_value(rounded)
}

pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

fn parse_value(text: &str) -> Option<f64> {
    match text.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

/// States in output order.
fn sorted_states(grid: &Grid, states: impl Iterator<Item = StateId>) -> Vec<StateId> {
    let mut v: Vec<StateId> = states.collect();
    v.sort_by(|a, b| {
        let (p, q) = (grid.point(*a), grid.point(*b));
        p.edge.cmp(&q.edge).then(p.s.total_cmp(&q.s))
    });
    v
}

pub enum CsvData<'a> {
    Grid(&'a GridFunction),
    /// Only the listed states, with their values.
    Points(&'a [(StateId, f64)]),
    Matrix(&'a BarrierMatrix),
    Gaps(&'a ConvergenceTable),
    Aubry(&'a AubrySet),
    Viscosity(&'a ViscosityReport),
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn point_fields(grid: &Grid, x: StateId) -> [String; 2] {
    let p = grid.point(x);
    [p.edge.to_string(), format_offset(p.s)]
}

/// Renders `data` as CSV text.
pub fn to_csv_string(grid: &Grid, data: CsvData<'_>) -> Result<String> {
    let mut w = writer();
    match data {
        CsvData::Grid(u) => {
            u.check_len(grid.len())?;
            w.write_record(["edge_id", "s", "value"])?;
            for x in sorted_states(grid, grid.states()) {
                let [e, s] = point_fields(grid, x);
                w.write_record([e, s, format_value(u.get(x))])?;
            }
        }
        CsvData::Points(points) => {
            w.write_record(["edge_id", "s", "value"])?;
            let value = |x: StateId| points.iter().find(|p| p.0 == x).map(|p| p.1).unwrap_or(f64::NAN);
            for x in sorted_states(grid, points.iter().map(|p| p.0)) {
                let [e, s] = point_fields(grid, x);
                w.write_record([e, s, format_value(value(x))])?;
            }
        }
        CsvData::Aubry(a) => {
            w.write_record(["edge_id", "s", "value"])?;
            for x in sorted_states(grid, a.members.iter().copied()) {
                let [e, s] = point_fields(grid, x);
                w.write_record([e, s, format_value(a.diagonal[x.0])])?;
            }
        }
        CsvData::Matrix(m) => {
            w.write_record(["src_edge", "src_s", "dst_edge", "dst_s", "value"])?;
            let targets = sorted_states(grid, grid.states());
            for src in sorted_states(grid, m.sources.iter().copied()) {
                let row = m.row(src).expect("source has a row");
                row.check_len(grid.len())?;
                let [se, ss] = point_fields(grid, src);
                for &dst in &targets {
                    let [de, ds] = point_fields(grid, dst);
                    w.write_record([se.clone(), ss.clone(), de, ds, format_value(row.get(dst))])?;
                }
            }
        }
        CsvData::Gaps(t) => {
            w.write_record(["t", "gap"])?;
            for (time, gap) in &t.rows {
                w.write_record([format_value(*time), format_value(*gap)])?;
            }
        }
        CsvData::Viscosity(r) => {
            w.write_record(["edge_id", "s", "class", "sub", "super"])?;
            let by_state = |x: StateId| r.states.iter().find(|c| c.state == x);
            for x in sorted_states(grid, r.states.iter().map(|c| c.state)) {
                let c = by_state(x).expect("listed state");
                let [e, s] = point_fields(grid, x);
                let class = format!("{:?}", c.class).to_lowercase();
                w.write_record([e, s, class, format_value(c.sub), format_value(c.sup)])?;
            }
        }
    }
    finish(w)
}

pub fn write_csv(grid: &Grid, data: CsvData<'_>, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(grid, data)?)?;
    Ok(())
}

/// Reads an `edge_id,s,value` table covering every state of `grid`.
pub fn read_grid_function(grid: &Grid, path: &Path) -> Result<GridFunction> {
    let mut rdr = csv::Reader::from_path(path)?;
    parse_grid_rows(grid, &mut rdr)
}

pub fn parse_grid_function(grid: &Grid, text: &str) -> Result<GridFunction> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    parse_grid_rows(grid, &mut rdr)
}

fn parse_grid_rows<R: std::io::Read>(grid: &Grid, rdr: &mut csv::Reader<R>) -> Result<GridFunction> {
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["edge_id", "s", "value"] {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `edge_id,s,value`".into(),
        });
    }
    let mut values = vec![f64::NAN; grid.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |m: String| Error::Parse { line, message: m };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, got {}", rec.len())));
        }
        let s = parse_value(&rec[1]).ok_or_else(|| bad(format!("bad offset `{}`", &rec[1])))?;
        let v = parse_value(&rec[2]).ok_or_else(|| bad(format!("bad value `{}`", &rec[2])))?;
        let x = grid
            .state_at(&GraphPoint::new(&rec[0], s))
            .map_err(|e| bad(e.to_string()))?;
        values[x.0] = v;
    }
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::Precondition(format!(
            "no value for state at {}",
            grid.point(StateId(i))
        )));
    }
    Ok(GridFunction::new(values))
}
