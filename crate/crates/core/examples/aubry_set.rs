//! Aubry set of the bump graph from the diagonal of the Peierls barrier.

use weak_kam_graph::weak_kam::{default_aubry_tolerance, peierls_barrier_auto};
use weak_kam_graph::{aubry_set, critical_value, samples, CriticalMethod, GraphPoint, Grid, TransitionGraph};

fn main() {
    let (g, gl) = samples::bump();
    let tg = TransitionGraph::build(Grid::new(&g, 1.0 / 64.0).unwrap(), gl, 1.0 / 8.0, 4.0).unwrap();
    let karp = critical_value(&tg, CriticalMethod::MinMeanCycle).unwrap().c;
    let slope = critical_value(&tg, CriticalMethod::long_time(&tg)).unwrap().c;
    let states: Vec<_> = tg.grid().states().collect();
    let h = peierls_barrier_auto(&tg, karp, &states).unwrap();
    if !h.window.is_adequate() {
        eprintln!("window flagged for {} pairs", h.window.flagged.len());
    }
    let diag = h.diagonal().unwrap();

    for tol in [default_aubry_tolerance(karp - slope), 0.01, 0.1] {
        let aubry = aubry_set(&diag, tol).unwrap();
        let top = GraphPoint::new("e2", 0.5);
        let reach = aubry
            .members
            .iter()
            .map(|&x| g.distance(tg.grid().point(x), &top).unwrap())
            .fold(0.0, f64::max);
        println!(
            "tol {tol:.4}: {} members, farthest {reach:.4} from the top, margin {:.2e} / {:.2e}",
            aubry.members.len(),
            aubry.margin.0,
            aubry.margin.1
        );
    }
}
