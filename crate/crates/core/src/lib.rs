//! Weak KAM quantities for mechanical Lagrangians on metric graphs: the
//! discrete Lax-Oleinik semigroup, critical value, Mañé potential, Peierls
//! barrier, Aubry set, weak KAM solutions and finite-difference viscosity
//! checks.
//!
//! ```
//! use weak_kam_graph::{samples, CriticalMethod, TransitionGraph, Grid, critical_value};
//!
//! let (graph, lagrangian) = samples::bump();
//! let grid = Grid::new(&graph, 1.0 / 16.0).unwrap();
//! let tg = TransitionGraph::build(grid, lagrangian, 1.0 / 4.0, 4.0).unwrap();
//! let c = critical_value(&tg, CriticalMethod::MinMeanCycle).unwrap().c;
//! assert!((c - 1.0).abs() < 1e-9);
//! ```

pub mod cli;
pub mod discretization;
pub mod error;
pub mod io;
pub mod lagrangian;
pub mod lax_oleinik;
pub mod metric_graph;
pub mod viscosity;
pub mod weak_kam;

pub use discretization::{GridFunction, Grid, StateId, TransitionArc, TransitionGraph, UNREACHABLE};
pub use error::{Error, Result};
pub use lagrangian::{Cone, EdgeLagrangian, GraphLagrangian, Polynomial};
pub use lax_oleinik::{backtrack_curve, energy_residual, lo_evolve, lo_evolve_with, lo_step, Evolve};
pub use metric_graph::{Edge, EdgeId, End, GraphPoint, MetricGraph, VertexId};
pub use viscosity::{check_stationary, check_time_dependent, comparison_probe, ViscosityOptions};
pub use weak_kam::{
    aubry_set, critical_value, default_window, mane_potential, peierls_barrier, weak_kam_solution,
    CriticalMethod,
};

/// Small reference graphs.
pub mod samples {
    use std::collections::BTreeMap;

    use crate::lagrangian::{EdgeLagrangian, GraphLagrangian};
    use crate::metric_graph::{Edge, MetricGraph};

    /// One unit edge `a–b`, `κ = 1`, `U ≡ 0`.
    pub fn free_edge() -> (MetricGraph, GraphLagrangian) {
        let g = MetricGraph::new(["a", "b"], vec![Edge::new("e1", "a", "b", 1.0)]);
        let gl = GraphLagrangian::uniform(&g, EdgeLagrangian::free()).expect("valid");
        (g, gl)
    }

    /// Two unit edges `a–b`: `U ≡ 0` on `e1`, `U = 4τ − 4τ²` on `e2`.
    pub fn bump() -> (MetricGraph, GraphLagrangian) {
        let g = MetricGraph::new(
            ["a", "b"],
            vec![Edge::new("e1", "a", "b", 1.0), Edge::new("e2", "a", "b", 1.0)],
        );
        let mut map = BTreeMap::new();
        map.insert("e1".into(), EdgeLagrangian::free());
        map.insert("e2".into(), EdgeLagrangian::mechanical(1.0, vec![0.0, 4.0, -4.0]));
        let gl = GraphLagrangian::new(&g, map).expect("valid");
        (g, gl)
    }
}
