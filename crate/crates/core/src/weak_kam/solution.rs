use crate::discretization::{GridFunction, StateId, TransitionGraph};
use crate::error::{Error, Result};
use crate::lax_oleinik::{lo_evolve_with, Evolve};

use super::barrier::{AubrySet, BarrierKind, BarrierMatrix};

/// Aubry tolerance above the uncertainty of `c`: `2 |c_1 − c_2| + 1e-3`.
pub fn default_aubry_tolerance(c_disagreement: f64) -> f64 {
    2.0 * c_disagreement.abs() + 1e-3
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakKamSolution {
    /// `v(x) = min_z u0(z) + h(z, x)`.
    pub full: GridFunction,
    /// `min_{q ∈ A} v(q) + h(q, x)`.
    pub representation: GridFunction,
    /// `sup |full − representation|`.
    pub max_difference: f64,
}

/// The long-time limit of `L_t u0 + c t` written with the barrier, plus the
/// same function rebuilt from its values on the Aubry set.
pub fn weak_kam_solution(u0: &GridFunction, barrier: &BarrierMatrix, aubry: &AubrySet) -> Result<WeakKamSolution> {
    if barrier.kind != BarrierKind::Peierls {
        return Err(Error::Precondition("weak KAM solution needs the Peierls barrier".into()));
    }
    if !barrier.is_complete() {
        return Err(Error::Precondition(
            "weak KAM solution needs the barrier from every source".into(),
        ));
    }
    let n = barrier.values.len();
    u0.check_len(n)?;
    let full = inf_convolution(u0.values(), barrier, (0..n).map(StateId));
    let representation = inf_convolution(full.values(), barrier, aubry.members.iter().copied());
    let max_difference = full.sup_distance(&representation);
    Ok(WeakKamSolution {
        full,
        representation,
        max_difference,
    })
}

fn inf_convolution(
    u: &[f64],
    barrier: &BarrierMatrix,
    sources: impl Iterator<Item = StateId> + Clone,
) -> GridFunction {
    let n = barrier.values.len();
    GridFunction::new(
        (0..n)
            .map(|x| {
                sources
                    .clone()
                    .filter(|z| u[z.0].is_finite())
                    .map(|z| u[z.0] + barrier.values[z.0].values()[x])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect(),
    )
}

/// `−h(·, x0)`.
pub fn forward_solution(barrier: &BarrierMatrix, x0: StateId) -> Result<GridFunction> {
    let col = barrier.column(x0)?;
    Ok(GridFunction::new(col.values().iter().map(|v| -v).collect()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    /// `(t, ‖L_t u0 + c t − v‖_∞)` at every recorded step, starting at `t = 0`.
    pub rows: Vec<(f64, f64)>,
    pub final_gap: f64,
    /// The gaps stop increasing before the second half of the run.
    pub eventually_nonincreasing: bool,
}

/// Evolves `u0` for `n_max` steps and records the sup-norm gap to `v_target`
/// every `record_every` steps.
pub fn convergence_run(
    u0: &GridFunction,
    tg: &TransitionGraph,
    c: f64,
    v_target: &GridFunction,
    n_max: usize,
    record_every: usize,
) -> Result<ConvergenceTable> {
    v_target.check_len(tg.len())?;
    let every = record_every.max(1);
    let res = lo_evolve_with(
        u0,
        tg,
        &Evolve {
            steps: n_max,
            critical: Some(c),
            frame_every: Some(every),
            ..Default::default()
        },
    )?;
    let mut rows: Vec<(f64, f64)> = res
        .frames
        .iter()
        .map(|(k, f)| (*k as f64 * tg.dt(), f.sup_distance(v_target)))
        .collect();
    if rows.last().map(|r| r.0) != Some(n_max as f64 * tg.dt()) {
        rows.push((n_max as f64 * tg.dt(), res.final_values.sup_distance(v_target)));
    }
    let final_gap = rows.last().map_or(f64::INFINITY, |r| r.1);
    let last_increase = rows
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].1 > w[0].1 + 1e-12)
        .map(|(i, _)| i + 1)
        .next_back()
        .unwrap_or(0);
    Ok(ConvergenceTable {
        eventually_nonincreasing: last_increase <= rows.len() / 2,
        rows,
        final_gap,
    })
}
