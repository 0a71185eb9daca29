//! Finite-difference certification of viscosity solutions of
//! `H(x, Du) = c` and `u_t + H(x, D_x u) = 0` on the graph.
//!
//! Interior states are classified from their one-sided slopes: nearly equal
//! slopes are tested as a classical point, a concave kink (`p⁻ > p⁺`) only
//! admits test functions from above (subsolution test over `[p⁺, p⁻]`), a
//! convex kink only from below (supersolution test over `[p⁻, p⁺]`).
//! At a vertex `e` with outward slopes `d_j` the subsolution condition is
//! `max_j H_j(e, d_j) <= c` and the supersolution condition
//! `max_j H_j(e, d_j) >= c`; by default `H_j` is evaluated in its eikonal
//! (full-line) form.

use crate::discretization::{Grid, GridFunction, StateId, StateSite};
use crate::error::{Error, Result};
use crate::lagrangian::{Cone, GraphLagrangian};
use crate::metric_graph::{End, GraphPoint};

/// Curvature bound used for the default kink threshold `2 dx K`.
pub const DEFAULT_CURVATURE_BOUND: f64 = 4.0;
pub const KINK_SAMPLES: usize = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct InteriorSlopes {
    pub state: StateId,
    pub left: f64,
    pub right: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexSlopes {
    pub state: StateId,
    /// `(edge index, end, outward slope)` for every incidence.
    pub outward: Vec<(usize, End, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeProfile {
    pub interior: Vec<InteriorSlopes>,
    pub vertices: Vec<VertexSlopes>,
    /// Largest absolute slope seen.
    pub lipschitz: f64,
}

pub fn one_sided_slopes(u: &GridFunction, grid: &Grid) -> Result<SlopeProfile> {
    u.check_len(grid.len())?;
    if let Some(i) = u.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Unreachable(i));
    }
    let mut interior = Vec::new();
    let mut vertices = Vec::new();
    let mut lipschitz: f64 = 0.0;
    let graph = grid.graph();
    for id in grid.states() {
        match grid.site(id) {
            StateSite::Interior { edge, node } => {
                let states = grid.edge_states_ix(edge);
                let h = grid.spacing_ix(edge);
                let left = (u.get(states[node]) - u.get(states[node - 1])) / h;
                let right = (u.get(states[node + 1]) - u.get(states[node])) / h;
                lipschitz = lipschitz.max(left.abs()).max(right.abs());
                interior.push(InteriorSlopes {
                    state: id,
                    left,
                    right,
                });
            }
            StateSite::Vertex(v) => {
                let outward = graph
                    .incidence_ix(v)
                    .iter()
                    .map(|&(edge, end)| {
                        let states = grid.edge_states_ix(edge);
                        let next = match end {
                            End::Start => states[1],
                            End::Finish => states[states.len() - 2],
                        };
                        let d = (u.get(next) - u.get(id)) / grid.spacing_ix(edge);
                        lipschitz = lipschitz.max(d.abs());
                        (edge, end, d)
                    })
                    .collect();
                vertices.push(VertexSlopes { state: id, outward });
            }
        }
    }
    Ok(SlopeProfile {
        interior,
        vertices,
        lipschitz,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateClass {
    Differentiable,
    ConcaveKink,
    ConvexKink,
    Vertex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateCheck {
    pub state: StateId,
    pub class: StateClass,
    /// Amount by which the subsolution inequality fails (0 when it holds).
    pub sub: f64,
    /// Amount by which the supersolution inequality fails (0 when it holds).
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViscosityReport {
    pub states: Vec<StateCheck>,
    pub sub_residual: f64,
    pub super_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ViscosityReport {
    fn from_checks(mut states: Vec<StateCheck>, tol: f64) -> Self {
        states.sort_by_key(|c| c.state);
        let sub_residual = states.iter().map(|c| c.sub).fold(0.0, f64::max);
        let super_residual = states.iter().map(|c| c.sup).fold(0.0, f64::max);
        Self {
            pass: sub_residual <= tol && super_residual <= tol,
            states,
            sub_residual,
            super_residual,
            tol,
        }
    }

    pub fn count(&self, class: StateClass) -> usize {
        self.states.iter().filter(|c| c.class == class).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViscosityOptions {
    /// `|p⁺ − p⁻| <= slope_tol` counts as differentiable.
    pub slope_tol: f64,
    pub vertex_cone: Cone,
}

impl ViscosityOptions {
    /// `slope_tol = 2 dx K` with `K` = [`DEFAULT_CURVATURE_BOUND`], eikonal vertices.
    pub fn for_grid(grid: &Grid) -> Self {
        let dx = grid
            .graph()
            .edges()
            .iter()
            .map(|e| grid.spacing(&e.id).unwrap_or(0.0))
            .fold(0.0, f64::max);
        Self {
            slope_tol: 2.0 * dx * DEFAULT_CURVATURE_BOUND,
            vertex_cone: Cone::FullLine,
        }
    }
}

fn require_eikonal(gl: &GraphLagrangian, grid: &Grid) -> Result<()> {
    let report = gl.check_symmetric_at_vertices(grid.graph())?;
    match report.vertices.into_iter().find(|v| !v.symmetric) {
        Some(v) => Err(Error::NotEikonal(v.vertex)),
        None => Ok(()),
    }
}

fn classify(left: f64, right: f64, slope_tol: f64) -> StateClass {
    if (right - left).abs() <= slope_tol {
        StateClass::Differentiable
    } else if left > right {
        StateClass::ConcaveKink
    } else {
        StateClass::ConvexKink
    }
}

/// Per-state checks against a level `level(state)`.
fn check_levels(
    profile: &SlopeProfile,
    gl: &GraphLagrangian,
    grid: &Grid,
    level: impl Fn(StateId) -> f64,
    opts: &ViscosityOptions,
) -> Result<Vec<StateCheck>> {
    let graph = grid.graph();
    let mut checks = Vec::with_capacity(grid.len());
    for s in &profile.interior {
        let point = grid.point(s.state);
        let c = level(s.state);
        let ham = |p: f64| -> Result<f64> {
            Ok(gl.hamiltonian_eval(graph, point, p, Cone::FullLine)?.value)
        };
        let class = classify(s.left, s.right, opts.slope_tol);
        let (sub, sup) = match class {
            StateClass::Differentiable => {
                let h = ham(0.5 * (s.left + s.right))?;
                ((h - c).max(0.0), (c - h).max(0.0))
            }
            StateClass::ConcaveKink | StateClass::ConvexKink => {
                let (lo, hi) = (s.left.min(s.right), s.left.max(s.right));
                let mut h_max = f64::NEG_INFINITY;
                let mut h_min = f64::INFINITY;
                for k in 0..KINK_SAMPLES {
                    let p = lo + (hi - lo) * k as f64 / (KINK_SAMPLES - 1) as f64;
                    let h = ham(p)?;
                    h_max = h_max.max(h);
                    h_min = h_min.min(h);
                }
                if class == StateClass::ConcaveKink {
                    ((h_max - c).max(0.0), 0.0)
                } else {
                    (0.0, (c - h_min).max(0.0))
                }
            }
            StateClass::Vertex => unreachable!(),
        };
        checks.push(StateCheck {
            state: s.state,
            class,
            sub,
            sup,
        });
    }
    for v in &profile.vertices {
        let c = level(v.state);
        let mut h_max = f64::NEG_INFINITY;
        for &(edge, end, d) in &v.outward {
            let e = &graph.edges()[edge];
            let (s, momentum) = match end {
                End::Start => (0.0, d),
                End::Finish => (e.length, -d),
            };
            let point = GraphPoint {
                edge: e.id.clone(),
                s,
            };
            h_max = h_max.max(gl.hamiltonian_eval(graph, &point, momentum, opts.vertex_cone)?.value);
        }
        checks.push(StateCheck {
            state: v.state,
            class: StateClass::Vertex,
            sub: (h_max - c).max(0.0),
            sup: (c - h_max).max(0.0),
        });
    }
    Ok(checks)
}

/// Checks `H(x, Du) = c` at every state.
pub fn check_stationary(
    u: &GridFunction,
    gl: &GraphLagrangian,
    grid: &Grid,
    c: f64,
    tol: f64,
    opts: &ViscosityOptions,
) -> Result<ViscosityReport> {
    require_eikonal(gl, grid)?;
    let profile = one_sided_slopes(u, grid)?;
    let checks = check_levels(&profile, gl, grid, |_| c, opts)?;
    Ok(ViscosityReport::from_checks(checks, tol))
}

/// Checks `u_t + H(x, D_x u) = 0` at every middle frame, with `u_t` from
/// centered differences of consecutive frames spaced `dt` apart.
pub fn check_time_dependent(
    frames: &[GridFunction],
    dt: f64,
    gl: &GraphLagrangian,
    grid: &Grid,
    tol: f64,
    opts: &ViscosityOptions,
) -> Result<ViscosityReport> {
    if frames.len() < 3 {
        return Err(Error::Precondition(format!(
            "time-dependent check needs at least 3 frames, got {}",
            frames.len()
        )));
    }
    require_eikonal(gl, grid)?;
    let mut worst: Vec<StateCheck> = Vec::new();
    for k in 1..frames.len() - 1 {
        let (prev, cur, next) = (&frames[k - 1], &frames[k], &frames[k + 1]);
        prev.check_len(grid.len())?;
        next.check_len(grid.len())?;
        let profile = one_sided_slopes(cur, grid)?;
        let level = |x: StateId| -(next.get(x) - prev.get(x)) / (2.0 * dt);
        let checks = check_levels(&profile, gl, grid, level, opts)?;
        if worst.is_empty() {
            worst = checks;
        } else {
            for (w, c) in worst.iter_mut().zip(checks) {
                if c.sub.max(c.sup) > w.sub.max(w.sup) {
                    *w = c;
                }
            }
        }
    }
    Ok(ViscosityReport::from_checks(worst, tol))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonOutcome {
    pub pass: bool,
    pub max_violation: f64,
}

/// Checks `u_sub <= v_super + tol` on every frame and state.
pub fn comparison_probe(
    u_sub: &[GridFunction],
    v_super: &[GridFunction],
    tol: f64,
) -> Result<ComparisonOutcome> {
    if u_sub.is_empty() || u_sub.len() != v_super.len() {
        return Err(Error::Precondition(
            "comparison needs two nonempty frame sequences of equal length".into(),
        ));
    }
    let ordered = u_sub[0]
        .values()
        .iter()
        .zip(v_super[0].values())
        .all(|(a, b)| a <= b);
    if !ordered {
        return Err(Error::Precondition(
            "initial data are not ordered: u_sub(·,0) <= v_super(·,0) fails".into(),
        ));
    }
    let mut max_violation: f64 = 0.0;
    for (u, v) in u_sub.iter().zip(v_super) {
        v.check_len(u.len())?;
        for (a, b) in u.values().iter().zip(v.values()) {
            max_violation = max_violation.max(a - b);
        }
    }
    Ok(ComparisonOutcome {
        pass: max_violation <= tol,
        max_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::EdgeLagrangian;
    use crate::metric_graph::{Edge, MetricGraph};
    use std::collections::BTreeMap;

    fn unit_edge(dx: f64) -> (Grid, GraphLagrangian) {
        let g = MetricGraph::new(["a", "b"], vec![Edge::new("e1", "a", "b", 1.0)]);
        let gl = GraphLagrangian::uniform(&g, EdgeLagrangian::free()).unwrap();
        (Grid::new(&g, dx).unwrap(), gl)
    }

    #[test]
    fn linear_slopes_exact() {
        let (grid, _) = unit_edge(0.125);
        let u = GridFunction::from_points(&grid, |p| 3.0 * p.s - 1.0);
        let prof = one_sided_slopes(&u, &grid).unwrap();
        for s in &prof.interior {
            assert!((s.left - 3.0).abs() < 1e-12 && (s.right - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn abs_kink_and_quadratic() {
        let (grid, _) = unit_edge(0.125);
        let u = GridFunction::from_points(&grid, |p| (p.s - 0.5).abs());
        let prof = one_sided_slopes(&u, &grid).unwrap();
        let mid = grid.state_at(&GraphPoint::new("e1", 0.5)).unwrap();
        let s = prof.interior.iter().find(|s| s.state == mid).unwrap();
        assert_eq!((s.left, s.right), (-1.0, 1.0));
        assert_eq!(classify(s.left, s.right, 0.1), StateClass::ConvexKink);

        let dx = 0.125;
        let u = GridFunction::from_points(&grid, |p| p.s * p.s);
        let prof = one_sided_slopes(&u, &grid).unwrap();
        for s in &prof.interior {
            let x = grid.point(s.state).s;
            assert!((s.left - (2.0 * x - dx)).abs() < 1e-12);
            assert!((s.right - (2.0 * x + dx)).abs() < 1e-12);
            assert!((0.5 * (s.left + s.right) - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_is_a_solution_of_free_problem() {
        let (grid, gl) = unit_edge(0.125);
        let u = GridFunction::constant(grid.len(), 2.0);
        let opts = ViscosityOptions::for_grid(&grid);
        let r = check_stationary(&u, &gl, &grid, 0.0, 1e-12, &opts).unwrap();
        assert!(r.pass);
        assert_eq!(r.count(StateClass::Differentiable), grid.len() - 2);
        let shifted = check_stationary(&u.shifted(5.0), &gl, &grid, 0.0, 1e-12, &opts).unwrap();
        assert_eq!(r, shifted);
    }

    #[test]
    fn abs_is_not_a_solution() {
        let (grid, gl) = unit_edge(1.0 / 64.0);
        let u = GridFunction::from_points(&grid, |p| (p.s - 0.5).abs());
        let opts = ViscosityOptions::for_grid(&grid);
        let r = check_stationary(&u, &gl, &grid, 0.0, 0.1, &opts).unwrap();
        assert!(!r.pass);
        assert!((r.sub_residual - 0.5).abs() < 1e-12);
    }

    #[test]
    fn non_eikonal_rejected() {
        let g = MetricGraph::new(
            ["a", "b", "c"],
            vec![Edge::new("e1", "a", "b", 1.0), Edge::new("e2", "b", "c", 1.0)],
        );
        let mut map = BTreeMap::new();
        map.insert("e1".into(), EdgeLagrangian::mechanical(1.0, vec![0.0]));
        map.insert("e2".into(), EdgeLagrangian::mechanical(2.0, vec![0.0]));
        let gl = GraphLagrangian::new(&g, map).unwrap();
        let grid = Grid::new(&g, 0.25).unwrap();
        let u = GridFunction::constant(grid.len(), 0.0);
        let opts = ViscosityOptions::for_grid(&grid);
        assert!(matches!(
            check_stationary(&u, &gl, &grid, 0.0, 0.1, &opts),
            Err(Error::NotEikonal(_))
        ));
    }

    #[test]
    fn time_dependent_needs_three_frames() {
        let (grid, gl) = unit_edge(0.25);
        let f = GridFunction::constant(grid.len(), 0.0);
        let opts = ViscosityOptions::for_grid(&grid);
        assert!(check_time_dependent(&[f.clone(), f.clone()], 0.1, &gl, &grid, 0.1, &opts).is_err());
        let r = check_time_dependent(&[f.clone(), f.clone(), f], 0.1, &gl, &grid, 1e-12, &opts).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn comparison_basics() {
        let a = GridFunction::new(vec![0.0, 1.0]);
        let b = GridFunction::new(vec![0.5, 1.0]);
        let ok = comparison_probe(std::slice::from_ref(&a), std::slice::from_ref(&a), 0.0).unwrap();
        assert!(ok.pass && ok.max_violation == 0.0);
        assert!(comparison_probe(std::slice::from_ref(&b), std::slice::from_ref(&a), 0.0).is_err());
        let later = comparison_probe(&[a.clone(), b.clone()], &[a.clone(), a], 0.0).unwrap();
        assert!(!later.pass);
        assert_eq!(later.max_violation, 0.5);
    }
}
