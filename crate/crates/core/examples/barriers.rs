//! Mañé potential and Peierls barrier from one source on the bump graph,
//! and a Φ-minimizing walk to the top of the bump.

use weak_kam_graph::weak_kam::{mane_minimizer, peierls_barrier_auto, default_max_steps};
use weak_kam_graph::{critical_value, energy_residual, mane_potential, samples, CriticalMethod, GraphPoint, Grid, TransitionGraph};

fn main() {
    let (g, gl) = samples::bump();
    let tg = TransitionGraph::build(Grid::new(&g, 1.0 / 64.0).unwrap(), gl, 1.0 / 8.0, 4.0).unwrap();
    let c = critical_value(&tg, CriticalMethod::MinMeanCycle).unwrap().c;
    let grid = tg.grid();
    let a = grid.state_at(&GraphPoint::new("e1", 0.0)).unwrap();
    let top = grid.state_at(&GraphPoint::new("e2", 0.5)).unwrap();

    let phi = mane_potential(&tg, c, &[a]).unwrap();
    let h = peierls_barrier_auto(&tg, c, &[a]).unwrap();
    println!("c = {c}");
    println!("{:>4} {:>8} {:>10} {:>10}", "edge", "s", "Phi(a,x)", "h(a,x)");
    for s in [0.0, 0.125, 0.25, 0.5, 0.75, 1.0] {
        let x = grid.nearest_state(&GraphPoint::new("e2", s)).unwrap();
        println!("{:>4} {s:>8.3} {:>10.5} {:>10.5}", "e2", phi.get(a, x).unwrap(), h.get(a, x).unwrap());
    }
    let exact = 2f64.sqrt() / 4.0;
    println!("Phi(a, top) = {:.5}, continuum {exact:.5}", phi.get(a, top).unwrap());

    let walk = mane_minimizer(&tg, c, a, top, default_max_steps(&tg)).unwrap();
    let steps = walk.states.len() - 1;
    let corrected = walk.action(&tg).unwrap() + steps as f64 * c * tg.dt();
    let residual = energy_residual(&walk, &tg, c).unwrap();
    println!("minimizer: {steps} steps, action + n c dt = {corrected:.5}, energy residual {residual:.4}");
}
