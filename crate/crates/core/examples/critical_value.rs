//! The critical value by minimum mean cycle and by the long-time slope of
//! `T^n 0`, on both sample graphs and at two time steps.

use weak_kam_graph::weak_kam::Diagnostics;
use weak_kam_graph::{critical_value, samples, CriticalMethod, Grid, TransitionGraph};

fn main() {
    for (name, sample) in [("free edge", samples::free_edge as fn() -> _), ("bump", samples::bump)] {
        for (dx, dt) in [(1.0 / 32.0, 1.0 / 8.0), (1.0 / 64.0, 1.0 / 8.0)] {
            let (g, gl) = sample();
            let tg = TransitionGraph::build(Grid::new(&g, dx).unwrap(), gl, dt, 4.0).unwrap();
            let karp = critical_value(&tg, CriticalMethod::MinMeanCycle).unwrap();
            let slope = critical_value(&tg, CriticalMethod::long_time(&tg)).unwrap();
            println!(
                "{name:9} dx {dx:.4} dt {dt:.4}: cycle {:.6} slope {:.6} (|diff| {:.1e})",
                karp.c,
                slope.c,
                (karp.c - slope.c).abs()
            );
            if let Diagnostics::Cycle { states, .. } = &karp.diagnostics {
                let pts: Vec<_> = states.iter().map(|s| tg.grid().point(*s)).collect();
                println!("    minimizing cycle through {pts:?}");
            }
        }
    }
}
