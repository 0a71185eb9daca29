//! A weak KAM solution from initial data, its representation from values on
//! the Aubry set, and the agreement with long-time evolution.

use weak_kam_graph::weak_kam::{default_aubry_tolerance, peierls_barrier_auto};
use weak_kam_graph::{
    aubry_set, critical_value, lo_evolve, samples, weak_kam_solution, CriticalMethod, Grid, GridFunction,
    TransitionGraph,
};

fn main() {
    let (g, gl) = samples::bump();
    let tg = TransitionGraph::build(Grid::new(&g, 1.0 / 32.0).unwrap(), gl, 1.0 / 8.0, 4.0).unwrap();
    let c = critical_value(&tg, CriticalMethod::MinMeanCycle).unwrap().c;
    let states: Vec<_> = tg.grid().states().collect();
    let h = peierls_barrier_auto(&tg, c, &states).unwrap();
    let aubry = aubry_set(&h.diagonal().unwrap(), default_aubry_tolerance(0.0)).unwrap();

    let u0 = GridFunction::from_points(tg.grid(), |p| (3.0 * p.s).cos());
    let sol = weak_kam_solution(&u0, &h, &aubry).unwrap();
    println!("|Aubry| = {}, sup |v - rep| = {:.2e}", aubry.members.len(), sol.max_difference);

    let long = lo_evolve(&u0, &tg, 2048, Some(c)).unwrap().final_values;
    println!("sup |T^2048 u0 + n c dt - v| = {:.2e}", long.sup_distance(&sol.full));
    let again = lo_evolve(&sol.full, &tg, 1, Some(c)).unwrap().final_values;
    println!("fixed point defect {:.2e}", again.sup_distance(&sol.full));
}
