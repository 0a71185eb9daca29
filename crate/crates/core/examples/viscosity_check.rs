//! Finite-difference viscosity checks: a weak KAM solution against
//! `H(x, u') = c`, a non-solution, a time-dependent run and a comparison probe.

use weak_kam_graph::viscosity::StateClass;
use weak_kam_graph::weak_kam::{default_aubry_tolerance, peierls_barrier_auto};
use weak_kam_graph::{
    aubry_set, check_stationary, check_time_dependent, comparison_probe, critical_value, lo_evolve_with, samples,
    weak_kam_solution, CriticalMethod, Evolve, Grid, GridFunction, TransitionGraph, ViscosityOptions,
};

fn main() {
    let (g, gl) = samples::bump();
    let tg = TransitionGraph::build(Grid::new(&g, 1.0 / 64.0).unwrap(), gl.clone(), 1.0 / 8.0, 4.0).unwrap();
    let grid = tg.grid();
    let opts = ViscosityOptions::for_grid(grid);
    let c = critical_value(&tg, CriticalMethod::MinMeanCycle).unwrap().c;
    let states: Vec<_> = grid.states().collect();
    let h = peierls_barrier_auto(&tg, c, &states).unwrap();
    let aubry = aubry_set(&h.diagonal().unwrap(), default_aubry_tolerance(0.0)).unwrap();
    let u0 = GridFunction::from_points(grid, |p| (3.0 * p.s).cos());
    let v = weak_kam_solution(&u0, &h, &aubry).unwrap().full;

    let report = check_stationary(&v, &gl, grid, c, 0.1, &opts).unwrap();
    println!(
        "weak KAM solution: sub {:.4} super {:.4} pass {} ({} concave kinks, {} convex kinks)",
        report.sub_residual,
        report.super_residual,
        report.pass,
        report.count(StateClass::ConcaveKink),
        report.count(StateClass::ConvexKink)
    );
    let wrong = GridFunction::from_points(grid, |p| p.s);
    let report = check_stationary(&wrong, &gl, grid, c, 0.1, &opts).unwrap();
    println!("u(s) = s: sub {:.4} super {:.4} pass {}", report.sub_residual, report.super_residual, report.pass);

    let run = |u: &GridFunction| {
        lo_evolve_with(u, &tg, &Evolve { steps: 64, frame_every: Some(1), ..Default::default() })
            .unwrap()
            .frames
            .into_iter()
            .map(|(_, f)| f)
            .collect::<Vec<_>>()
    };
    let frames = run(&u0);
    let report = check_time_dependent(&frames[3..=5], tg.dt(), &gl, grid, 0.2, &opts).unwrap();
    println!("time-dependent at t = 0.5: sub {:.4} super {:.4}", report.sub_residual, report.super_residual);

    let upper = GridFunction::new(u0.values().iter().map(|x| x + 0.25).collect());
    let probe = comparison_probe(&frames, &run(&upper), 0.0).unwrap();
    println!("comparison: pass {} max violation {:.2e}", probe.pass, probe.max_violation);
}
