//! Discrete state space and the one-step transition digraph.
//!
//! Every edge `j` is cut into `N_j = ceil(s_j / dx)` cells; interior nodes
//! and vertices become states (one state per vertex, shared by all incident
//! edges). A transition `x -> y` exists whenever `d(x, y) <= vmax * dt`; its
//! weight is the action of the constant-speed motion along the shortest path
//! during one time step, integrated with the midpoint rule on each
//! intra-edge segment.

use std::collections::{BinaryHeap, HashMap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lagrangian::GraphLagrangian;
use crate::metric_graph::{EdgeId, GraphPoint, MetricGraph, Segment, Site, VertexId};

/// Stand-in for `+∞` in source-initialized dynamic programs.
pub const UNREACHABLE: f64 = f64::INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSite {
    Vertex(usize),
    Interior { edge: usize, node: usize },
}

#[derive(Clone, Debug)]
pub struct Grid {
    graph: MetricGraph,
    nodes: Vec<usize>,
    spacing: Vec<f64>,
    /// `edge_states[j][k]` for `k = 0..=N_j`; the ends are vertex states.
    edge_states: Vec<Vec<StateId>>,
    sites: Vec<StateSite>,
    points: Vec<GraphPoint>,
}

impl Grid {
    pub fn new(graph: &MetricGraph, dx_target: f64) -> Result<Self> {
        if !(dx_target.is_finite() && dx_target > 0.0) {
            return Err(Error::Config(format!("dx must be positive, got {dx_target}")));
        }
        graph.ensure_usable()?;
        let nv = graph.vertices().len();
        let mut sites: Vec<StateSite> = (0..nv).map(StateSite::Vertex).collect();
        let mut nodes = Vec::new();
        let mut spacing = Vec::new();
        let mut edge_states = Vec::new();
        for (j, edge) in graph.edges().iter().enumerate() {
            let n = ((edge.length / dx_target - 1e-9).ceil() as usize).max(2);
            let [a, b] = graph.edge_ends(j);
            let mut states = vec![StateId(a)];
            for k in 1..n {
                states.push(StateId(sites.len()));
                sites.push(StateSite::Interior { edge: j, node: k });
            }
            states.push(StateId(b));
            nodes.push(n);
            spacing.push(edge.length / n as f64);
            edge_states.push(states);
        }
        let mut grid = Self {
            graph: graph.clone(),
            nodes,
            spacing,
            edge_states,
            sites,
            points: Vec::new(),
        };
        grid.points = (0..grid.sites.len())
            .map(|i| grid.compute_point(StateId(i)))
            .collect();
        Ok(grid)
    }

    fn compute_point(&self, id: StateId) -> GraphPoint {
        match self.sites[id.0] {
            StateSite::Vertex(v) => self
                .graph
                .vertex_point(&self.graph.vertices()[v])
                .expect("usable graph"),
            StateSite::Interior { edge, node } => GraphPoint {
                edge: self.graph.edges()[edge].id.clone(),
                s: self.node_offset(edge, node),
            },
        }
    }

    pub(crate) fn node_offset(&self, edge: usize, node: usize) -> f64 {
        if node == self.nodes[edge] {
            self.graph.edges()[edge].length
        } else {
            node as f64 * self.spacing[edge]
        }
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.sites.len()).map(StateId)
    }

    /// Canonical point of a state.
    pub fn point(&self, id: StateId) -> &GraphPoint {
        &self.points[id.0]
    }

    pub fn points(&self) -> &[GraphPoint] {
        &self.points
    }

    pub fn site(&self, id: StateId) -> StateSite {
        self.sites[id.0]
    }

    pub fn is_vertex(&self, id: StateId) -> bool {
        matches!(self.sites[id.0], StateSite::Vertex(_))
    }

    pub fn vertex_state(&self, vertex: &VertexId) -> Result<StateId> {
        Ok(StateId(self.graph.vertex_ix(vertex)?))
    }

    pub fn cells(&self, edge: &EdgeId) -> Result<usize> {
        Ok(self.nodes[self.graph.edge_ix(edge)?])
    }

    pub fn spacing(&self, edge: &EdgeId) -> Result<f64> {
        Ok(self.spacing[self.graph.edge_ix(edge)?])
    }

    pub(crate) fn spacing_ix(&self, edge: usize) -> f64 {
        self.spacing[edge]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// States along an edge from `s = 0` to `s = length`.
    pub fn edge_states(&self, edge: &EdgeId) -> Result<&[StateId]> {
        Ok(&self.edge_states[self.graph.edge_ix(edge)?])
    }

    pub(crate) fn edge_states_ix(&self, edge: usize) -> &[StateId] {
        &self.edge_states[edge]
    }

    /// The state sitting exactly on `p` (up to `1e-9` relative offset).
    pub fn state_at(&self, p: &GraphPoint) -> Result<StateId> {
        let id = self.nearest_state(p)?;
        let e = self.graph.edge_ix(&p.edge)?;
        let k = (p.s / self.spacing[e]).round();
        if (p.s - k * self.spacing[e]).abs() > 1e-9 * self.graph.edges()[e].length.max(1.0) {
            return Err(Error::Precondition(format!("{p} is not a grid node")));
        }
        Ok(id)
    }

    pub fn nearest_state(&self, p: &GraphPoint) -> Result<StateId> {
        self.graph.resolve(p)?;
        let e = self.graph.edge_ix(&p.edge)?;
        let k = ((p.s / self.spacing[e]).round() as usize).min(self.nodes[e]);
        Ok(self.edge_states[e][k])
    }

    /// Neighbouring states along edges: `(neighbor, edge, s_from, s_to)`.
    fn neighbors(&self) -> Vec<Vec<(usize, usize, f64, f64)>> {
        let mut adj = vec![Vec::new(); self.len()];
        for (j, states) in self.edge_states.iter().enumerate() {
            for k in 0..self.nodes[j] {
                let (x, y) = (states[k].0, states[k + 1].0);
                let (s0, s1) = (self.node_offset(j, k), self.node_offset(j, k + 1));
                adj[x].push((y, j, s0, s1));
                adj[y].push((x, j, s1, s0));
            }
        }
        adj
    }
}

/// One admissible move of the discrete dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionArc {
    pub from: StateId,
    pub to: StateId,
    /// Length of the path travelled (graph distance).
    pub distance: f64,
    pub weight: f64,
    /// Intra-edge pieces of the path, in traversal order. Empty for rest arcs.
    pub segments: Vec<Segment>,
}

impl TransitionArc {
    pub fn is_rest(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Clone, Debug)]
pub struct TransitionGraph {
    grid: Grid,
    lagrangian: GraphLagrangian,
    dt: f64,
    vmax: f64,
    arcs: Vec<TransitionArc>,
    /// Arc indices by source, sorted by target.
    outgoing: Vec<Vec<usize>>,
    /// Compressed incoming lists sorted by source: `(from, weight)`.
    in_offsets: Vec<usize>,
    in_from: Vec<usize>,
    in_weight: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl TransitionGraph {
    /// Builds all arcs of length at most `vmax * dt`.
    pub fn build(grid: Grid, lagrangian: GraphLagrangian, dt: f64, vmax: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        if !(vmax.is_finite() && vmax > 0.0) {
            return Err(Error::Config(format!("vmax must be positive, got {vmax}")));
        }
        let reach = vmax * dt;
        if reach < grid.min_spacing() * (1.0 - 1e-9) {
            return Err(Error::Config(format!(
                "vmax*dt = {reach} is below the smallest cell {}; no state can move",
                grid.min_spacing()
            )));
        }
        let adjacency = grid.neighbors();
        let per_source: Vec<Vec<TransitionArc>> = (0..grid.len())
            .into_par_iter()
            .map(|x| arcs_from(&grid, &lagrangian, &adjacency, x, dt, reach))
            .collect::<Result<_>>()?;
        let arcs: Vec<TransitionArc> = per_source.into_iter().flatten().collect();

        let n = grid.len();
        let mut outgoing = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for (i, arc) in arcs.iter().enumerate() {
            outgoing[arc.from.0].push(i);
            incoming[arc.to.0].push(i);
        }
        for list in &mut outgoing {
            list.sort_by_key(|&i| arcs[i].to);
        }
        for list in &mut incoming {
            list.sort_by_key(|&i| arcs[i].from);
        }
        let mut in_offsets = vec![0];
        let mut in_from = Vec::with_capacity(arcs.len());
        let mut in_weight = Vec::with_capacity(arcs.len());
        for list in &incoming {
            for &i in list {
                in_from.push(arcs[i].from.0);
                in_weight.push(arcs[i].weight);
            }
            in_offsets.push(in_from.len());
        }
        Ok(Self {
            grid,
            lagrangian,
            dt,
            vmax,
            arcs,
            outgoing,
            in_offsets,
            in_from,
            in_weight,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn graph(&self) -> &MetricGraph {
        self.grid.graph()
    }

    pub fn lagrangian(&self) -> &GraphLagrangian {
        &self.lagrangian
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn vmax(&self) -> f64 {
        self.vmax
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn arcs(&self) -> &[TransitionArc] {
        &self.arcs
    }

    pub fn outgoing(&self, x: StateId) -> impl Iterator<Item = &TransitionArc> {
        self.outgoing[x.0].iter().map(move |&i| &self.arcs[i])
    }

    /// Incoming `(from, weight)` pairs, sorted by source state.
    pub(crate) fn incoming_raw(&self, x: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.in_offsets[x], self.in_offsets[x + 1]);
        (&self.in_from[a..b], &self.in_weight[a..b])
    }

    pub fn arc(&self, from: StateId, to: StateId) -> Option<&TransitionArc> {
        let list = &self.outgoing[from.0];
        list.binary_search_by_key(&to, |&i| self.arcs[i].to)
            .ok()
            .map(|k| &self.arcs[list[k]])
    }

    /// Weight of the move `x -> y`, if the move is admissible.
    pub fn one_step_cost(&self, x: StateId, y: StateId) -> Option<f64> {
        self.arc(x, y).map(|a| a.weight)
    }

    /// Bounds `dt * min L` and `dt * max L` over the graph and `|v| <= vmax`,
    /// taken over the potential sampled at grid states and segment midpoints.
    pub fn weight_bounds(&self) -> (f64, f64) {
        let mut u_min = f64::INFINITY;
        let mut u_max = f64::NEG_INFINITY;
        let mut k_max: f64 = 0.0;
        for (_, lag) in self.lagrangian.iter() {
            k_max = k_max.max(lag.kinetic);
            for i in 0..=256 {
                let u = lag.potential_at(i as f64 / 256.0);
                u_min = u_min.min(u);
                u_max = u_max.max(u);
            }
        }
        (
            -self.dt * u_max,
            self.dt * (0.5 * k_max * self.vmax * self.vmax - u_min),
        )
    }
}

/// Midpoint-rule action of a constant-speed traversal of `segments` in time
/// `dt`, or the rest action `dt * L(x, 0)` when the path is empty.
pub fn path_action(
    graph: &MetricGraph,
    lagrangian: &GraphLagrangian,
    rest_point: &GraphPoint,
    segments: &[Segment],
    dt: f64,
) -> Result<f64> {
    let distance: f64 = segments.iter().map(Segment::length).sum();
    if distance == 0.0 {
        return Ok(dt * lagrangian.lagrangian_eval(graph, rest_point, 0.0)?.0);
    }
    let speed = distance / dt;
    let mut total = 0.0;
    for seg in segments {
        let len = seg.length();
        let length = graph.edge(&seg.edge)?.length;
        let tau_mid = 0.5 * (seg.from + seg.to) / length;
        let v = if seg.to >= seg.from { speed } else { -speed };
        let (l, _) = lagrangian.edge(&seg.edge)?.eval(tau_mid, v);
        total += len / speed * l;
    }
    Ok(total)
}

fn arcs_from(
    grid: &Grid,
    lagrangian: &GraphLagrangian,
    adjacency: &[Vec<(usize, usize, f64, f64)>],
    source: usize,
    dt: f64,
    reach: f64,
) -> Result<Vec<TransitionArc>> {
    let limit = reach * (1.0 + 1e-9);
    let mut dist: HashMap<usize, f64> = HashMap::new();
    let mut pred: HashMap<usize, (usize, usize, f64, f64)> =
        HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut settled = Vec::new();
    dist.insert(source, 0.0);
    heap.push(Entry(0.0, source));
    let mut done = HashSet::new();
    while let Some(Entry(d, v)) = heap.pop() {
        if !done.insert(v) {
            continue;
        }
        settled.push(v);
        for &(w, edge, s0, s1) in &adjacency[v] {
            let nd = d + (s1 - s0).abs();
            if nd > limit {
                continue;
            }
            if dist.get(&w).is_none_or(|&old| nd < old) {
                dist.insert(w, nd);
                pred.insert(w, (v, edge, s0, s1));
                heap.push(Entry(nd, w));
            }
        }
    }
    settled.sort_unstable();
    let graph = grid.graph();
    let mut arcs = Vec::with_capacity(settled.len());
    for y in settled {
        let mut raw: Vec<(usize, f64, f64)> = Vec::new();
        let mut cur = y;
        while cur != source {
            let (prev, edge, s0, s1) = pred[&cur];
            raw.push((edge, s0, s1));
            cur = prev;
        }
        raw.reverse();
        let mut merged: Vec<(usize, f64, f64)> = Vec::new();
        for (edge, s0, s1) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == edge && last.2 == s0 && (last.2 - last.1) * (s1 - s0) > 0.0 => {
                    last.2 = s1;
                }
                _ => merged.push((edge, s0, s1)),
            }
        }
        let segments: Vec<Segment> = merged
            .into_iter()
            .map(|(e, from, to)| Segment {
                edge: graph.edges()[e].id.clone(),
                from,
                to,
            })
            .collect();
        let x_point = grid.point(StateId(source));
        let weight = path_action(graph, lagrangian, x_point, &segments, dt)?;
        let distance: f64 = segments.iter().map(Segment::length).sum();
        debug_assert!({
            let sx = graph.resolve(x_point).unwrap();
            let sy = graph.resolve(grid.point(StateId(y))).unwrap();
            (graph.site_distance(sx, sy) - distance).abs() < 1e-9
                || matches!((sx, sy), (Site::Vertex(_), Site::Vertex(_)))
        });
        arcs.push(TransitionArc {
            from: StateId(source),
            to: StateId(y),
            distance,
            weight,
            segments,
        });
    }
    Ok(arcs)
}

/// Real values on all states of a grid; `+∞` marks unreachable states.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self {
            values: vec![value; len],
        }
    }

    /// Zero at `source`, [`UNREACHABLE`] elsewhere.
    pub fn point_source(len: usize, source: StateId) -> Self {
        let mut values = vec![UNREACHABLE; len];
        values[source.0] = 0.0;
        Self { values }
    }

    pub fn from_points(grid: &Grid, f: impl Fn(&GraphPoint) -> f64) -> Self {
        Self {
            values: grid.points().iter().map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, id: StateId) -> f64 {
        self.values[id.0]
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.values.len() == expected {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                expected,
                got: self.values.len(),
            })
        }
    }

    /// Minimum over finite entries (`+∞` when there are none).
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_finite(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn shifted(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + a).collect(),
        }
    }

    /// `sup |self - other|`; two `+∞` entries agree, one alone gives `+∞`.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                if a == b {
                    0.0
                } else {
                    (a - b).abs()
                }
            })
            .fold(0.0, f64::max)
    }
}
