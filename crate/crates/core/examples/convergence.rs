//! Gap between `T^n u0 + n c dt` and the weak KAM limit as `t` grows.

use weak_kam_graph::weak_kam::{convergence_run, default_aubry_tolerance, peierls_barrier_auto};
use weak_kam_graph::{
    aubry_set, critical_value, samples, weak_kam_solution, CriticalMethod, Grid, GridFunction, TransitionGraph,
};

fn main() {
    let (g, gl) = samples::bump();
    let tg = TransitionGraph::build(Grid::new(&g, 1.0 / 32.0).unwrap(), gl, 1.0 / 8.0, 4.0).unwrap();
    let c = critical_value(&tg, CriticalMethod::MinMeanCycle).unwrap().c;
    let states: Vec<_> = tg.grid().states().collect();
    let h = peierls_barrier_auto(&tg, c, &states).unwrap();
    let aubry = aubry_set(&h.diagonal().unwrap(), default_aubry_tolerance(0.0)).unwrap();
    let u0 = GridFunction::from_points(tg.grid(), |p| (3.0 * p.s).cos());
    let v = weak_kam_solution(&u0, &h, &aubry).unwrap().full;

    let table = convergence_run(&u0, &tg, c, &v, 96, 4).unwrap();
    println!("{:>8} {:>12}", "t", "gap");
    for (t, gap) in &table.rows {
        println!("{t:>8.2} {gap:>12.3e}");
    }
    println!("eventually nonincreasing: {}", table.eventually_nonincreasing);
}
