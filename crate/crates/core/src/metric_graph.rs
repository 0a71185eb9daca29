//! Finite metric graphs: vertices, arc-length parametrized edges, points on
//! edges with vertex identification, and the unit-speed-geodesic distance.
//!
//! A point is an `(edge, s)` pair with `0 <= s <= length(edge)`. Points at
//! `s = 0` or `s = length` are the edge endpoints and are identified across
//! every edge meeting that vertex. [`MetricGraph::canonicalize`] picks one
//! representative per vertex (the lexicographically smallest `(EdgeId, end)`).
//!
//! Vertex-to-vertex distances are computed once at construction with
//! Dijkstra from every vertex; point queries add the edge offsets.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(String);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(String);

macro_rules! string_id {
    ($t:ident) => {
        impl $t {
            pub fn new(name: impl Into<String>) -> Self {
                Self(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

string_id!(VertexId);
string_id!(EdgeId);

/// Which end of an edge: `Start` is arc length 0, `Finish` is arc length `length`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Start,
    Finish,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub endpoint0: VertexId,
    pub endpoint1: VertexId,
    pub length: f64,
}

impl Edge {
    pub fn new(id: &str, endpoint0: &str, endpoint1: &str, length: f64) -> Self {
        Self {
            id: id.into(),
            endpoint0: endpoint0.into(),
            endpoint1: endpoint1.into(),
            length,
        }
    }
}

/// A location on the graph, given as an arc-length offset along an edge.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPoint {
    pub edge: EdgeId,
    pub s: f64,
}

impl GraphPoint {
    pub fn new(edge: &str, s: f64) -> Self {
        Self {
            edge: edge.into(),
            s,
        }
    }
}

impl fmt::Display for GraphPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.edge, self.s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Empty,
    DuplicateVertex(VertexId),
    DuplicateEdge(EdgeId),
    UnknownEndpoint { edge: EdgeId, vertex: VertexId },
    NonPositiveLength { edge: EdgeId, length: f64 },
    IsolatedVertex(VertexId),
    Disconnected { components: Vec<Vec<VertexId>> },
    /// Degree-one vertex. Accepted; all algorithms stay well defined.
    LeafVertex(VertexId),
}

impl Violation {
    pub fn severity(&self) -> Severity {
        match self {
            Violation::LeafVertex(_) => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph has no edges"),
            Violation::DuplicateVertex(v) => write!(f, "duplicate vertex {v}"),
            Violation::DuplicateEdge(e) => write!(f, "duplicate edge {e}"),
            Violation::UnknownEndpoint { edge, vertex } => {
                write!(f, "unknown endpoint {vertex} on edge {edge}")
            }
            Violation::NonPositiveLength { edge, length } => {
                write!(f, "non-positive length {length} on edge {edge}")
            }
            Violation::IsolatedVertex(v) => write!(f, "vertex {v} has no incident edge"),
            Violation::Disconnected { components } => {
                let parts: Vec<String> = components
                    .iter()
                    .map(|c| {
                        let names: Vec<&str> = c.iter().map(|v| v.as_str()).collect();
                        format!("{{{}}}", names.join(","))
                    })
                    .collect();
                write!(f, "disconnected: {}", parts.join(" "))
            }
            Violation::LeafVertex(v) => write!(f, "vertex {v} has degree 1"),
        }
    }
}

/// Resolved location of a point in index space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Site {
    Vertex(usize),
    Interior { edge: usize, s: f64 },
}

/// A straight traversal of part of one edge, from offset `from` to offset `to`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub edge: EdgeId,
    pub from: f64,
    pub to: f64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.to - self.from).abs()
    }
}

/// Polyline realizing a shortest path. `points` has one more entry than
/// `segments`; consecutive points lie on the segment between them.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPath {
    pub points: Vec<GraphPoint>,
    pub segments: Vec<Segment>,
}

impl GeodesicPath {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Immutable after construction; all queries take `&self`.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    vertex_index: HashMap<VertexId, usize>,
    edge_index: HashMap<EdgeId, usize>,
    ends: Vec<Option<[usize; 2]>>,
    /// Per vertex, incident `(edge, end)` pairs sorted by `(EdgeId, End)`.
    incidence: Vec<Vec<(usize, End)>>,
    vertex_dist: Vec<Vec<f64>>,
    /// `vertex_pred[src][v] = (edge, previous vertex)` on the shortest path.
    vertex_pred: Vec<Vec<Option<(usize, usize)>>>,
}

impl MetricGraph {
    /// Builds the graph structure. Never fails: malformed input is reported
    /// by [`MetricGraph::validate`].
    pub fn new<V: Into<VertexId>>(vertices: impl IntoIterator<Item = V>, edges: Vec<Edge>) -> Self {
        let vertices: Vec<VertexId> = vertices.into_iter().map(Into::into).collect();
        let mut vertex_index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            vertex_index.entry(v.clone()).or_insert(i);
        }
        let mut edge_index = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            edge_index.entry(e.id.clone()).or_insert(i);
        }
        let ends: Vec<Option<[usize; 2]>> = edges
            .iter()
            .map(|e| {
                let a = vertex_index.get(&e.endpoint0)?;
                let b = vertex_index.get(&e.endpoint1)?;
                Some([*a, *b])
            })
            .collect();
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (ei, e) in ends.iter().enumerate() {
            if edge_index.get(&edges[ei].id) != Some(&ei) {
                continue;
            }
            if let Some([a, b]) = e {
                incidence[*a].push((ei, End::Start));
                incidence[*b].push((ei, End::Finish));
            }
        }
        for list in &mut incidence {
            list.sort_by(|x, y| edges[x.0].id.cmp(&edges[y.0].id).then(x.1.cmp(&y.1)));
        }
        let mut graph = Self {
            vertices,
            edges,
            vertex_index,
            edge_index,
            ends,
            incidence,
            vertex_dist: Vec::new(),
            vertex_pred: Vec::new(),
        };
        let (dist, pred): (Vec<_>, Vec<_>) =
            (0..graph.vertices.len()).map(|v| graph.dijkstra(v)).unzip();
        graph.vertex_dist = dist;
        graph.vertex_pred = pred;
        graph
    }

    fn usable_length(&self, edge: usize) -> Option<f64> {
        let l = self.edges[edge].length;
        (l.is_finite() && l > 0.0).then_some(l)
    }

    fn dijkstra(&self, source: usize) -> (Vec<f64>, Vec<Option<(usize, usize)>>) {
        let n = self.vertices.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapEntry {
            dist: 0.0,
            vertex: source,
        });
        while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(e, end) in &self.incidence[v] {
                let Some(len) = self.usable_length(e) else {
                    continue;
                };
                let [a, b] = self.ends[e].expect("incident edges have known endpoints");
                let w = if end == End::Start { b } else { a };
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    pred[w] = Some((e, v));
                    heap.push(HeapEntry { dist: nd, vertex: w });
                }
            }
        }
        (dist, pred)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: &EdgeId) -> Result<&Edge> {
        self.edge_index
            .get(id)
            .map(|&i| &self.edges[i])
            .ok_or_else(|| Error::UnknownEdge(id.clone()))
    }

    pub(crate) fn edge_ix(&self, id: &EdgeId) -> Result<usize> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.clone()))
    }

    pub(crate) fn vertex_ix(&self, id: &VertexId) -> Result<usize> {
        self.vertex_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.clone()))
    }

    /// Endpoint vertex indices of an edge, `[start, finish]`.
    pub(crate) fn edge_ends(&self, edge: usize) -> [usize; 2] {
        self.ends[edge].expect("validated graph")
    }

    /// Incident `(EdgeId, End)` pairs of a vertex, sorted.
    pub fn incidence(&self, vertex: &VertexId) -> Result<Vec<(EdgeId, End)>> {
        let v = self.vertex_ix(vertex)?;
        Ok(self.incidence[v]
            .iter()
            .map(|&(e, end)| (self.edges[e].id.clone(), end))
            .collect())
    }

    pub(crate) fn incidence_ix(&self, vertex: usize) -> &[(usize, End)] {
        &self.incidence[vertex]
    }

    /// All invariant violations, errors first in discovery order, then warnings.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.edges.is_empty() {
            out.push(Violation::Empty);
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if self.vertex_index[v] != i {
                out.push(Violation::DuplicateVertex(v.clone()));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if self.edge_index[&e.id] != i {
                out.push(Violation::DuplicateEdge(e.id.clone()));
            }
            for v in [&e.endpoint0, &e.endpoint1] {
                if !self.vertex_index.contains_key(v) {
                    out.push(Violation::UnknownEndpoint {
                        edge: e.id.clone(),
                        vertex: v.clone(),
                    });
                }
            }
            if self.usable_length(i).is_none() {
                out.push(Violation::NonPositiveLength {
                    edge: e.id.clone(),
                    length: e.length,
                });
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if self.vertex_index[v] == i && self.incidence[i].is_empty() {
                out.push(Violation::IsolatedVertex(v.clone()));
            }
        }
        let components = self.components();
        if components.len() > 1 {
            out.push(Violation::Disconnected { components });
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if self.vertex_index[v] == i && self.incidence[i].len() == 1 {
                out.push(Violation::LeafVertex(v.clone()));
            }
        }
        out
    }

    /// True when [`validate`](Self::validate) reports no errors.
    pub fn is_usable(&self) -> bool {
        self.validate()
            .iter()
            .all(|v| v.severity() == Severity::Warning)
    }

    pub fn ensure_usable(&self) -> Result<()> {
        let errors: Vec<String> = self
            .validate()
            .iter()
            .filter(|v| v.severity() == Severity::Error)
            .map(ToString::to_string)
            .collect();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(errors.join("; ")))
        }
    }

    /// Connected components over edges with known endpoints (any length).
    fn components(&self) -> Vec<Vec<VertexId>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for [a, b] in self.ends.iter().flatten() {
            let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: Vec<Vec<VertexId>> = Vec::new();
        let mut root_slot = HashMap::new();
        for i in 0..n {
            if self.vertex_index[&self.vertices[i]] != i {
                continue;
            }
            let r = find(&mut parent, i);
            let slot = *root_slot.entry(r).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[slot].push(self.vertices[i].clone());
        }
        groups
    }

    pub(crate) fn resolve(&self, p: &GraphPoint) -> Result<Site> {
        let e = self.edge_ix(&p.edge)?;
        let length = self.edges[e].length;
        if !(p.s >= 0.0 && p.s <= length) {
            return Err(Error::OffsetOutOfRange {
                edge: p.edge.clone(),
                s: p.s,
                length,
            });
        }
        let ends = self.ends[e].ok_or_else(|| {
            Error::InvalidGraph(format!("edge {} has an unknown endpoint", p.edge))
        })?;
        Ok(if p.s == 0.0 {
            Site::Vertex(ends[0])
        } else if p.s == length {
            Site::Vertex(ends[1])
        } else {
            Site::Interior { edge: e, s: p.s }
        })
    }

    /// Canonical representative of a vertex: the smallest `(EdgeId, End)`.
    pub(crate) fn vertex_point_ix(&self, v: usize) -> Option<(usize, End)> {
        self.incidence[v].first().copied()
    }

    pub fn vertex_point(&self, vertex: &VertexId) -> Result<GraphPoint> {
        let v = self.vertex_ix(vertex)?;
        let (e, end) = self
            .vertex_point_ix(v)
            .ok_or_else(|| Error::InvalidGraph(format!("vertex {vertex} has no incident edge")))?;
        Ok(self.point_at_end(e, end))
    }

    fn point_at_end(&self, e: usize, end: End) -> GraphPoint {
        let edge = &self.edges[e];
        GraphPoint {
            edge: edge.id.clone(),
            s: match end {
                End::Start => 0.0,
                End::Finish => edge.length,
            },
        }
    }

    /// Maps vertex-coincident points to one representative; interior points
    /// are returned unchanged.
    pub fn canonicalize(&self, p: &GraphPoint) -> Result<GraphPoint> {
        match self.resolve(p)? {
            Site::Vertex(v) => {
                let (e, end) = self.vertex_point_ix(v).expect("vertex with an incident edge");
                Ok(self.point_at_end(e, end))
            }
            Site::Interior { .. } => Ok(p.clone()),
        }
    }

    /// The vertex a point sits on, if any.
    pub fn vertex_at(&self, p: &GraphPoint) -> Result<Option<VertexId>> {
        Ok(match self.resolve(p)? {
            Site::Vertex(v) => Some(self.vertices[v].clone()),
            Site::Interior { .. } => None,
        })
    }

    pub fn same_point(&self, p: &GraphPoint, q: &GraphPoint) -> Result<bool> {
        Ok(self.canonicalize(p)? == self.canonicalize(q)?)
    }

    /// `(vertex, offset to it, end)` pairs from which a shortest path can leave a site.
    fn anchors(&self, site: Site) -> Vec<(usize, f64, Option<(usize, End)>)> {
        match site {
            Site::Vertex(v) => vec![(v, 0.0, None)],
            Site::Interior { edge, s } => {
                let [a, b] = self.ends[edge].expect("resolved");
                let len = self.edges[edge].length;
                vec![
                    (a, s, Some((edge, End::Start))),
                    (b, len - s, Some((edge, End::Finish))),
                ]
            }
        }
    }

    pub(crate) fn site_distance(&self, x: Site, y: Site) -> f64 {
        self.best_route(x, y).0
    }

    /// Shortest route between two sites: `(length, route)` where route is
    /// `None` for a direct intra-edge segment, else the anchors chosen.
    #[allow(clippy::type_complexity)]
    fn best_route(
        &self,
        x: Site,
        y: Site,
    ) -> (
        f64,
        Option<((usize, Option<(usize, End)>), (usize, Option<(usize, End)>))>,
    ) {
        let mut best = (f64::INFINITY, None);
        if let (Site::Interior { edge: ex, s: sx }, Site::Interior { edge: ey, s: sy }) = (x, y) {
            if ex == ey {
                best = ((sx - sy).abs(), None);
            }
        }
        if let (Site::Vertex(a), Site::Vertex(b)) = (x, y) {
            if a == b {
                return (0.0, None);
            }
        }
        for (ax, ox, ex) in self.anchors(x) {
            for (ay, oy, ey) in self.anchors(y) {
                let d = ox + self.vertex_dist[ax][ay] + oy;
                if d < best.0 {
                    best = (d, Some(((ax, ex), (ay, ey))));
                }
            }
        }
        best
    }

    /// Length of the shortest unit-speed geodesic from `x` to `y`.
    pub fn distance(&self, x: &GraphPoint, y: &GraphPoint) -> Result<f64> {
        Ok(self.site_distance(self.resolve(x)?, self.resolve(y)?))
    }

    /// A polyline realizing [`distance`](Self::distance).
    pub fn geodesic(&self, x: &GraphPoint, y: &GraphPoint) -> Result<GeodesicPath> {
        let (sx, sy) = (self.resolve(x)?, self.resolve(y)?);
        let (d, route) = self.best_route(sx, sy);
        let x = self.canonicalize(x)?;
        let y = self.canonicalize(y)?;
        if !d.is_finite() {
            return Err(Error::InvalidGraph(format!("no path from {x} to {y}")));
        }
        let Some(((ax, ex), (ay, ey))) = route else {
            if d == 0.0 {
                return Ok(GeodesicPath {
                    points: vec![x],
                    segments: vec![],
                });
            }
            let seg = Segment {
                edge: x.edge.clone(),
                from: x.s,
                to: y.s,
            };
            return Ok(GeodesicPath {
                points: vec![x, y],
                segments: vec![seg],
            });
        };
        let mut segments = Vec::new();
        if let (Some((e, end)), Site::Interior { s, .. }) = (ex, sx) {
            segments.push(self.segment_to_end(e, s, end));
        }
        segments.extend(self.vertex_path_segments(ax, ay));
        if let (Some((e, end)), Site::Interior { s, .. }) = (ey, sy) {
            let mut seg = self.segment_to_end(e, s, end);
            std::mem::swap(&mut seg.from, &mut seg.to);
            segments.push(seg);
        }
        let mut points = vec![x];
        for (i, seg) in segments.iter().enumerate() {
            let end = if i + 1 == segments.len() {
                y.clone()
            } else {
                self.canonicalize(&GraphPoint {
                    edge: seg.edge.clone(),
                    s: seg.to,
                })?
            };
            points.push(end);
        }
        Ok(GeodesicPath { points, segments })
    }

    fn segment_to_end(&self, e: usize, s: f64, end: End) -> Segment {
        let len = self.edges[e].length;
        Segment {
            edge: self.edges[e].id.clone(),
            from: s,
            to: if end == End::Start { 0.0 } else { len },
        }
    }

    fn vertex_path_segments(&self, from: usize, to: usize) -> Vec<Segment> {
        let mut segs = Vec::new();
        let mut v = to;
        while v != from {
            let (e, prev) = self.vertex_pred[from][v].expect("reachable vertex");
            let [a, _] = self.ends[e].expect("resolved");
            let len = self.edges[e].length;
            let (s0, s1) = if a == prev { (0.0, len) } else { (len, 0.0) };
            segs.push(Segment {
                edge: self.edges[e].id.clone(),
                from: s0,
                to: s1,
            });
            v = prev;
        }
        segs.reverse();
        segs
    }

    /// Largest distance from a vertex to any point of the graph. Coincides
    /// with the diameter whenever some farthest pair has a vertex in it.
    pub fn diameter(&self) -> f64 {
        let mut diam: f64 = 0.0;
        for v in 0..self.vertices.len() {
            for (e, ends) in self.ends.iter().enumerate() {
                let (Some([a, b]), Some(len)) = (ends, self.usable_length(e)) else {
                    continue;
                };
                let (da, db) = (self.vertex_dist[v][*a], self.vertex_dist[v][*b]);
                if da.is_finite() && db.is_finite() {
                    // farthest point on the edge from v
                    let far = ((da + db + len) / 2.0).min(da.max(db) + len).max(da.max(db));
                    diam = diam.max(far);
                }
            }
        }
        diam
    }
}
