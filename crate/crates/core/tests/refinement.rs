//! Discrete quantities approach their continuum values when `dx / dt -> 0`.

use weak_kam_graph::lax_oleinik::energy_residual;
use weak_kam_graph::viscosity::{check_stationary, ViscosityOptions};
use weak_kam_graph::weak_kam::{
    default_aubry_tolerance, default_max_steps, mane_minimizer, peierls_barrier_auto, weak_kam_solution,
};
use weak_kam_graph::{
    aubry_set, critical_value, mane_potential, samples, CriticalMethod, GraphPoint, Grid, GridFunction,
    TransitionGraph,
};

fn bump(dx: f64, dt: f64) -> (TransitionGraph, f64) {
    let (g, gl) = samples::bump();
    let tg = TransitionGraph::build(Grid::new(&g, dx).unwrap(), gl, dt, 4.0).unwrap();
    let c = critical_value(&tg, CriticalMethod::MinMeanCycle).unwrap().c;
    (tg, c)
}

fn at(tg: &TransitionGraph, edge: &str, s: f64) -> weak_kam_graph::StateId {
    tg.grid().state_at(&GraphPoint::new(edge, s)).unwrap()
}

#[test]
fn potential_to_the_top_converges() {
    let exact = 2f64.sqrt() / 4.0;
    let errors: Vec<f64> = [32.0, 64.0, 128.0]
        .iter()
        .map(|cells| {
            let (tg, c) = bump(1.0 / cells, 1.0 / 8.0);
            assert_eq!(c, 1.0);
            let a = at(&tg, "e1", 0.0);
            let phi = mane_potential(&tg, c, &[a]).unwrap();
            (phi.get(a, at(&tg, "e2", 0.5)).unwrap() - exact).abs()
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[2] < 1e-3, "{errors:?}");
}

#[test]
fn free_edge_potential_is_one_half_quantum() {
    for (dx, dt) in [(1.0 / 32.0, 1.0 / 8.0), (1.0 / 128.0, 1.0 / 8.0)] {
        let (g, gl) = samples::free_edge();
        let tg = TransitionGraph::build(Grid::new(&g, dx).unwrap(), gl, dt, 4.0).unwrap();
        let states: Vec<_> = tg.grid().states().collect();
        let phi = mane_potential(&tg, 0.0, &states).unwrap();
        let sup = phi.values.iter().map(GridFunction::max_finite).fold(0.0, f64::max);
        assert!((sup - dx / (2.0 * dt)).abs() < 1e-12, "dx {dx}: {sup}");
    }
}

#[test]
fn minimizer_energy_residual_decreases() {
    let residuals: Vec<f64> = [(64.0, 8.0), (256.0, 16.0)]
        .iter()
        .map(|(cells, steps)| {
            let (tg, c) = bump(1.0 / cells, 1.0 / steps);
            let walk = mane_minimizer(&tg, c, at(&tg, "e1", 0.0), at(&tg, "e2", 0.5), default_max_steps(&tg)).unwrap();
            energy_residual(&walk, &tg, c).unwrap()
        })
        .collect();
    assert!(residuals[1] < 0.5 * residuals[0], "{residuals:?}");
    assert!(residuals[1] < 0.05, "{residuals:?}");
}

#[test]
fn weak_kam_solution_passes_stationary_check() {
    let (tg, c) = bump(1.0 / 64.0, 1.0 / 8.0);
    let states: Vec<_> = tg.grid().states().collect();
    let h = peierls_barrier_auto(&tg, c, &states).unwrap();
    assert!(h.window.is_adequate());
    let aubry = aubry_set(&h.diagonal().unwrap(), default_aubry_tolerance(0.0)).unwrap();
    let u0 = GridFunction::from_points(tg.grid(), |p| (3.0 * p.s).cos());
    let v = weak_kam_solution(&u0, &h, &aubry).unwrap().full;
    let opts = ViscosityOptions::for_grid(tg.grid());
    let report = check_stationary(&v, tg.lagrangian(), tg.grid(), c, 0.1, &opts).unwrap();
    assert!(report.pass, "sub {} super {}", report.sub_residual, report.super_residual);
    let shifted = check_stationary(&v, tg.lagrangian(), tg.grid(), c + 0.5, 0.1, &opts).unwrap();
    assert!(!shifted.pass);
}
