//! Edge-wise Tonelli Lagrangians and the graph Hamiltonian.
//!
//! Only the mechanical family `L(x, v) = κ v²/2 − U(τ)` is built in, with
//! `U` a polynomial in the normalized arc coordinate `τ = s / length`.
//! The Hamiltonian uses the convention `H(x, p) = max_z { −p z − L(x, z) }`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::metric_graph::{EdgeId, End, GraphPoint, MetricGraph, Site, VertexId};

/// Tolerance for `L_i(e, 0) = L_j(e, 0)` at shared vertices.
pub const VERTEX_COMPATIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect::<Vec<_>>();
        if coeffs.is_empty() {
            Polynomial::zero()
        } else {
            Polynomial::new(coeffs)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LagrangianKind {
    Mechanical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeLagrangian {
    pub kind: LagrangianKind,
    pub kinetic: f64,
    pub potential: Polynomial,
}

impl EdgeLagrangian {
    pub fn mechanical(kinetic: f64, potential: Vec<f64>) -> Self {
        Self {
            kind: LagrangianKind::Mechanical,
            kinetic,
            potential: Polynomial::new(potential),
        }
    }

    /// `κ = 1`, `U ≡ 0`.
    pub fn free() -> Self {
        Self::mechanical(1.0, vec![0.0])
    }

    fn check(&self, edge: &EdgeId) -> Result<()> {
        if !(self.kinetic.is_finite() && self.kinetic > 0.0) {
            return Err(Error::InvalidLagrangian {
                edge: edge.clone(),
                reason: format!("kinetic coefficient {} must be positive", self.kinetic),
            });
        }
        if self.potential.coeffs.is_empty() || self.potential.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidLagrangian {
                edge: edge.clone(),
                reason: "potential needs finite coefficients".into(),
            });
        }
        Ok(())
    }

    pub fn potential_at(&self, tau: f64) -> f64 {
        self.potential.eval(tau)
    }

    /// `(L, L_v)` at normalized position `tau` and velocity `v`.
    pub fn eval(&self, tau: f64, v: f64) -> (f64, f64) {
        match self.kind {
            LagrangianKind::Mechanical => (
                0.5 * self.kinetic * v * v - self.potential_at(tau),
                self.kinetic * v,
            ),
        }
    }

    /// Closed-form Legendre transform over the whole line.
    pub fn hamiltonian(&self, tau: f64, momentum: f64) -> HamiltonianValue {
        match self.kind {
            LagrangianKind::Mechanical => HamiltonianValue {
                value: momentum * momentum / (2.0 * self.kinetic) + self.potential_at(tau),
                maximizer: -momentum / self.kinetic,
            },
        }
    }

    /// Closed-form maximum over the half-line `z >= 0` (`sign = 1.0`) or
    /// `z <= 0` (`sign = -1.0`).
    pub fn hamiltonian_half_line(&self, tau: f64, momentum: f64, sign: f64) -> HamiltonianValue {
        let full = self.hamiltonian(tau, momentum);
        if full.maximizer * sign >= 0.0 {
            full
        } else {
            HamiltonianValue {
                value: -self.eval(tau, 0.0).0,
                maximizer: 0.0,
            }
        }
    }
}

/// Set of admissible velocities for the Hamiltonian maximization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    FullLine,
    /// Vectors pointing into the edge from the vertex, or zero.
    IncomingOrZero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianValue {
    pub value: f64,
    pub maximizer: f64,
}

/// Golden-section maximization of `−p z − L(z)` over `[lo, hi]`.
pub fn legendre_numeric(
    lagrangian: impl Fn(f64) -> f64,
    momentum: f64,
    lo: f64,
    hi: f64,
) -> HamiltonianValue {
    let f = |z: f64| -momentum * z - lagrangian(z);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mut best = (0.5 * (a + b), f(0.5 * (a + b)));
    for z in [lo, hi] {
        let v = f(z);
        if v > best.1 {
            best = (z, v);
        }
    }
    HamiltonianValue {
        value: best.1,
        maximizer: best.0,
    }
}

/// Bracket half-width for the numeric Legendre transform.
pub fn legendre_bracket(momentum: f64, kinetic: f64) -> f64 {
    (momentum.abs() + 1.0) * 10.0 / kinetic
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexSymmetry {
    pub vertex: VertexId,
    pub symmetric: bool,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub vertices: Vec<VertexSymmetry>,
}

/// Per-edge Lagrangians on a graph, vertex-compatible by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphLagrangian {
    per_edge: BTreeMap<EdgeId, EdgeLagrangian>,
}

impl GraphLagrangian {
    /// Checks that every edge carries a valid Lagrangian and that
    /// `L(e, 0)` agrees across the edges meeting each vertex.
    pub fn new(graph: &MetricGraph, per_edge: BTreeMap<EdgeId, EdgeLagrangian>) -> Result<Self> {
        for edge in graph.edges() {
            per_edge
                .get(&edge.id)
                .ok_or_else(|| Error::MissingLagrangian(edge.id.clone()))?
                .check(&edge.id)?;
        }
        if let Some(extra) = per_edge.keys().find(|e| graph.edge(e).is_err()) {
            return Err(Error::UnknownEdge(extra.clone()));
        }
        let gl = Self { per_edge };
        for vertex in graph.vertices() {
            let values: Vec<f64> = graph
                .incidence(vertex)?
                .iter()
                // L(e, 0) = −U(e)
                .map(|(e, end)| -gl.per_edge[e].potential_at(end_tau(*end)))
                .collect();
            if let Some(first) = values.first() {
                for v in &values[1..] {
                    if (v - first).abs() > VERTEX_COMPATIBILITY_TOL {
                        return Err(Error::VertexMismatch {
                            vertex: vertex.clone(),
                            left: *first,
                            right: *v,
                        });
                    }
                }
            }
        }
        Ok(gl)
    }

    pub fn uniform(graph: &MetricGraph, lagrangian: EdgeLagrangian) -> Result<Self> {
        let map = graph
            .edges()
            .iter()
            .map(|e| (e.id.clone(), lagrangian.clone()))
            .collect();
        Self::new(graph, map)
    }

    pub fn edge(&self, id: &EdgeId) -> Result<&EdgeLagrangian> {
        self.per_edge
            .get(id)
            .ok_or_else(|| Error::MissingLagrangian(id.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EdgeId, &EdgeLagrangian)> {
        self.per_edge.iter()
    }

    fn tau(graph: &MetricGraph, p: &GraphPoint) -> Result<f64> {
        Ok(p.s / graph.edge(&p.edge)?.length)
    }

    /// `(L, L_v)` at a point; the point's edge fixes the velocity orientation.
    pub fn lagrangian_eval(&self, graph: &MetricGraph, p: &GraphPoint, v: f64) -> Result<(f64, f64)> {
        graph.resolve(p)?;
        Ok(self.edge(&p.edge)?.eval(Self::tau(graph, p)?, v))
    }

    /// Evaluation at a vertex. A non-zero velocity needs an incident edge.
    pub fn lagrangian_at_vertex(
        &self,
        graph: &MetricGraph,
        vertex: &VertexId,
        v: f64,
        edge: Option<&EdgeId>,
    ) -> Result<(f64, f64)> {
        let incident = graph.incidence(vertex)?;
        let chosen = match edge {
            Some(e) => incident
                .iter()
                .find(|(id, _)| id == e)
                .ok_or_else(|| Error::Precondition(format!("edge {e} does not meet vertex {vertex}")))?,
            None if v != 0.0 => {
                return Err(Error::AmbiguousDirection {
                    vertex: vertex.clone(),
                    velocity: v,
                })
            }
            None => incident
                .first()
                .ok_or_else(|| Error::InvalidGraph(format!("vertex {vertex} has no incident edge")))?,
        };
        Ok(self.edge(&chosen.0)?.eval(end_tau(chosen.1), v))
    }

    /// Potential `U` at a point (edge-independent at vertices).
    pub fn potential(&self, graph: &MetricGraph, p: &GraphPoint) -> Result<f64> {
        Ok(-self.lagrangian_eval(graph, p, 0.0)?.0)
    }

    /// `max { −p z − L(x, z) }` over the requested cone. `momentum` is the
    /// derivative along the point's edge coordinate. `IncomingOrZero` at an
    /// interior point is the same as `FullLine`.
    pub fn hamiltonian_eval(
        &self,
        graph: &MetricGraph,
        p: &GraphPoint,
        momentum: f64,
        cone: Cone,
    ) -> Result<HamiltonianValue> {
        let site = graph.resolve(p)?;
        let lag = self.edge(&p.edge)?;
        let tau = Self::tau(graph, p)?;
        Ok(match (cone, site) {
            (Cone::FullLine, _) | (Cone::IncomingOrZero, Site::Interior { .. }) => {
                lag.hamiltonian(tau, momentum)
            }
            (Cone::IncomingOrZero, Site::Vertex(_)) => {
                // at s = 0 incoming vectors are z >= 0; at s = length, z <= 0
                let sign = if p.s == 0.0 { 1.0 } else { -1.0 };
                lag.hamiltonian_half_line(tau, momentum, sign)
            }
        })
    }

    /// Samples `L_j(e, ±z)` on every incident edge of every vertex.
    pub fn check_symmetric_at_vertices(&self, graph: &MetricGraph) -> Result<SymmetryReport> {
        const SAMPLES: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
        let mut vertices = Vec::new();
        for vertex in graph.vertices() {
            let incident = graph.incidence(vertex)?;
            let mut dev: f64 = 0.0;
            if let Some((e0, end0)) = incident.first() {
                let reference = self.edge(e0)?;
                for &z in &SAMPLES {
                    let lambda = reference.eval(end_tau(*end0), z).0;
                    for (e, end) in &incident {
                        let lag = self.edge(e)?;
                        for v in [z, -z] {
                            dev = dev.max((lag.eval(end_tau(*end), v).0 - lambda).abs());
                        }
                    }
                }
            }
            vertices.push(VertexSymmetry {
                vertex: vertex.clone(),
                symmetric: dev <= VERTEX_COMPATIBILITY_TOL,
                max_deviation: dev,
            });
        }
        Ok(SymmetryReport {
            symmetric: vertices.iter().all(|v| v.symmetric),
            vertices,
        })
    }
}

pub(crate) fn end_tau(end: End) -> f64 {
    match end {
        End::Start => 0.0,
        End::Finish => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_graph::Edge;

    fn single_edge(lag: EdgeLagrangian) -> (MetricGraph, GraphLagrangian) {
        let g = MetricGraph::new(["a", "b"], vec![Edge::new("e1", "a", "b", 1.0)]);
        let gl = GraphLagrangian::uniform(&g, lag).unwrap();
        (g, gl)
    }

    #[test]
    fn lagrangian_closed_forms() {
        let (g, gl) = single_edge(EdgeLagrangian::free());
        assert_eq!(gl.lagrangian_eval(&g, &GraphPoint::new("e1", 0.3), 2.0).unwrap(), (2.0, 2.0));
        let (g, gl) = single_edge(EdgeLagrangian::mechanical(2.0, vec![0.0, 1.0]));
        let (l, lv) = gl.lagrangian_eval(&g, &GraphPoint::new("e1", 0.5), 1.0).unwrap();
        assert!((l - (0.5 * 2.0 * 1.0 - 0.5)).abs() < 1e-15);
        assert_eq!(lv, 2.0);
        let (l0, lv0) = gl.lagrangian_eval(&g, &GraphPoint::new("e1", 0.25), 0.0).unwrap();
        assert_eq!((l0, lv0), (-0.25, 0.0));
    }

    #[test]
    fn vertex_velocity_needs_edge() {
        let (g, gl) = single_edge(EdgeLagrangian::free());
        assert!(matches!(
            gl.lagrangian_at_vertex(&g, &"a".into(), 1.0, None),
            Err(Error::AmbiguousDirection { .. })
        ));
        assert_eq!(gl.lagrangian_at_vertex(&g, &"a".into(), 0.0, None).unwrap(), (0.0, 0.0));
        assert_eq!(
            gl.lagrangian_at_vertex(&g, &"a".into(), 2.0, Some(&"e1".into())).unwrap(),
            (2.0, 2.0)
        );
    }

    #[test]
    fn hamiltonian_full_line() {
        let (g, gl) = single_edge(EdgeLagrangian::mechanical(1.0, vec![0.0, 4.0, -4.0]));
        let p = GraphPoint::new("e1", 0.5);
        let h0 = gl.hamiltonian_eval(&g, &p, 0.0, Cone::FullLine).unwrap();
        assert_eq!(h0.value, 1.0);
        assert_eq!(h0.maximizer, 0.0);
        let (g, gl) = single_edge(EdgeLagrangian::free());
        let h = gl.hamiltonian_eval(&g, &p, 1.0, Cone::FullLine).unwrap();
        assert_eq!(h.value, 0.5);
        assert_eq!(h.maximizer, -1.0);
        let num = legendre_numeric(|z| 0.5 * z * z, 1.0, -20.0, 20.0);
        assert!((num.value - 0.5).abs() < 1e-10);
        assert!((num.maximizer + 1.0).abs() < 1e-6);
    }

    #[test]
    fn hamiltonian_half_line_at_vertices() {
        let (g, gl) = single_edge(EdgeLagrangian::free());
        for &m in &[-2.0, -0.5, 0.0, 0.7, 3.0] {
            let start = gl
                .hamiltonian_eval(&g, &GraphPoint::new("e1", 0.0), m, Cone::IncomingOrZero)
                .unwrap();
            let oracle = legendre_numeric(|z| 0.5 * z * z, m, 0.0, legendre_bracket(m, 1.0));
            assert!((start.value - oracle.value).abs() < 1e-10);
            assert!((start.value - f64::max(-m, 0.0).powi(2) / 2.0).abs() < 1e-15);
            let finish = gl
                .hamiltonian_eval(&g, &GraphPoint::new("e1", 1.0), m, Cone::IncomingOrZero)
                .unwrap();
            let oracle = legendre_numeric(|z| 0.5 * z * z, m, -legendre_bracket(m, 1.0), 0.0);
            assert!((finish.value - oracle.value).abs() < 1e-10);
            assert!((finish.value - f64::max(m, 0.0).powi(2) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_at_vertices() {
        let (g, gl) = single_edge(EdgeLagrangian::mechanical(1.0, vec![0.3, 1.0]));
        assert!(gl.check_symmetric_at_vertices(&g).unwrap().symmetric);
        let g = MetricGraph::new(
            ["a", "b", "c"],
            vec![Edge::new("e1", "a", "b", 1.0), Edge::new("e2", "b", "c", 1.0)],
        );
        let mut map = BTreeMap::new();
        map.insert(EdgeId::from("e1"), EdgeLagrangian::mechanical(1.0, vec![0.0]));
        map.insert(EdgeId::from("e2"), EdgeLagrangian::mechanical(2.0, vec![0.0]));
        let gl = GraphLagrangian::new(&g, map).unwrap();
        let report = gl.check_symmetric_at_vertices(&g).unwrap();
        assert!(!report.symmetric);
        let b = report.vertices.iter().find(|v| v.vertex.as_str() == "b").unwrap();
        assert!(!b.symmetric);
        let a = report.vertices.iter().find(|v| v.vertex.as_str() == "a").unwrap();
        assert!(a.symmetric);
    }

    #[test]
    fn vertex_mismatch_rejected() {
        let g = MetricGraph::new(
            ["a", "b"],
            vec![Edge::new("e1", "a", "b", 1.0), Edge::new("e2", "a", "b", 1.0)],
        );
        let mut map = BTreeMap::new();
        map.insert(EdgeId::from("e1"), EdgeLagrangian::mechanical(1.0, vec![1.0]));
        map.insert(EdgeId::from("e2"), EdgeLagrangian::mechanical(1.0, vec![0.0]));
        let err = GraphLagrangian::new(&g, map).unwrap_err();
        assert_eq!(err.to_string(), "L mismatch at vertex a: -1 vs -0");
    }

    #[test]
    fn non_positive_kinetic_rejected() {
        let g = MetricGraph::new(["a", "b"], vec![Edge::new("e1", "a", "b", 1.0)]);
        assert!(matches!(
            GraphLagrangian::uniform(&g, EdgeLagrangian::mechanical(0.0, vec![0.0])),
            Err(Error::InvalidLagrangian { .. })
        ));
    }
}
