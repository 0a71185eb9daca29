//! Critical value, Mañé potential, Peierls barrier, Aubry set and weak KAM
//! solutions of the discrete model.

mod barrier;
mod critical;
mod solution;

pub use barrier::{
    aubry_set, default_max_steps, default_window, mane_minimizer, mane_potential, negative_cycle_tolerance, peierls_barrier,
    peierls_barrier_auto, peierls_barrier_sliding, AubrySet, BarrierKind, BarrierMatrix, Window, WindowReport,
};
pub use critical::{
    critical_value, karp_min_mean_cycle, CriticalMethod, CriticalValue, Diagnostics, MeanCycle,
    WeightedDigraph,
};
pub use solution::{
    convergence_run, default_aubry_tolerance, forward_solution, weak_kam_solution, ConvergenceTable,
    WeakKamSolution,
};
