//! Discrete Lax-Oleinik operator:
//! `(T u)(x) = min over arcs y -> x of u(y) + w(y -> x)`.
//!
//! `n` applications approximate `L_{n dt} u`; with a point-source initial
//! datum they give the finite-time minimal action `h_{n dt}(source, ·)`.

use rayon::prelude::*;

use crate::discretization::{GridFunction, StateId, TransitionGraph, UNREACHABLE};
use crate::error::{Error, Result};

/// One Bellman step. Returns the new values and, per state, the minimizing
/// predecessor (smallest `StateId` on ties; the state itself when unreachable).
pub fn lo_step(u: &GridFunction, tg: &TransitionGraph) -> (GridFunction, Vec<StateId>) {
    let (values, argmin): (Vec<f64>, Vec<StateId>) = (0..tg.len())
        .into_par_iter()
        .map(|x| relax(u.values(), tg, x, 0.0))
        .unzip();
    (GridFunction::new(values), argmin)
}

#[inline]
fn relax(u: &[f64], tg: &TransitionGraph, x: usize, shift: f64) -> (f64, StateId) {
    let (from, weight) = tg.incoming_raw(x);
    let mut best = UNREACHABLE;
    let mut arg = x;
    for (&y, &w) in from.iter().zip(weight) {
        let uy = u[y];
        if uy == UNREACHABLE {
            continue;
        }
        let cand = uy + (w + shift);
        if cand < best {
            best = cand;
            arg = y;
        }
    }
    (best, StateId(arg))
}

/// Values-only step with every weight shifted by `shift` (used for `c dt`).
pub(crate) fn step_shifted(u: &[f64], tg: &TransitionGraph, shift: f64, out: &mut [f64]) {
    out.par_iter_mut()
        .enumerate()
        .for_each(|(x, o)| *o = relax(u, tg, x, shift).0);
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    /// `u_n`, or `u_n + n c dt` when a critical value was supplied.
    pub final_values: GridFunction,
    /// Per step: `‖u_{k+1} − u_k + c dt‖_∞` (raw difference without `c`).
    pub deltas: Vec<f64>,
    pub steps: usize,
    pub dt: f64,
    pub critical: Option<f64>,
    /// First step after which the deltas stayed below the detector
    /// tolerance for [`CONVERGENCE_WINDOW`] consecutive steps.
    pub converged_at: Option<usize>,
    /// `argmins[k][x]`: predecessor of `x` in step `k + 1`, when recorded.
    pub argmins: Option<Vec<Vec<StateId>>>,
    /// Recorded frames `(step, u_step + step c dt)`.
    pub frames: Vec<(usize, GridFunction)>,
    initial: GridFunction,
}

pub const CONVERGENCE_WINDOW: usize = 10;

/// Options for [`lo_evolve_with`].
#[derive(Clone, Debug, Default)]
pub struct Evolve {
    pub steps: usize,
    pub critical: Option<f64>,
    pub record_argmin: bool,
    /// Record every `k`-th frame (and frame 0).
    pub frame_every: Option<usize>,
    /// Tolerance for the convergence detector.
    pub tol: Option<f64>,
    /// Stop once the detector fires.
    pub stop_when_converged: bool,
}

/// `n`-fold composition of [`lo_step`].
pub fn lo_evolve(u0: &GridFunction, tg: &TransitionGraph, n: usize, c: Option<f64>) -> Result<EvolutionResult> {
    lo_evolve_with(
        u0,
        tg,
        &Evolve {
            steps: n,
            critical: c,
            ..Default::default()
        },
    )
}

pub fn lo_evolve_with(u0: &GridFunction, tg: &TransitionGraph, opts: &Evolve) -> Result<EvolutionResult> {
    if opts.steps == 0 {
        return Err(Error::Precondition("evolution needs at least one step".into()));
    }
    u0.check_len(tg.len())?;
    let shift = opts.critical.unwrap_or(0.0) * tg.dt();
    let mut current = u0.clone();
    let mut deltas = Vec::with_capacity(opts.steps);
    let mut argmins = opts.record_argmin.then(Vec::new);
    let mut frames = Vec::new();
    if opts.frame_every.is_some() {
        frames.push((0, u0.clone()));
    }
    let mut quiet = 0;
    let mut converged_at = None;
    let mut steps = 0;
    for k in 1..=opts.steps {
        let (raw, arg) = lo_step(&current, tg);
        // carry the c-correction so the stored state is u_k + k c dt
        let next = GridFunction::new(
            raw.values()
                .iter()
                .map(|v| if *v == UNREACHABLE { *v } else { v + shift })
                .collect(),
        );
        let delta = next.sup_distance(&current);
        deltas.push(delta);
        if let Some(a) = argmins.as_mut() {
            a.push(arg);
        }
        current = next;
        steps = k;
        if let Some(every) = opts.frame_every {
            if k % every.max(1) == 0 {
                frames.push((k, current.clone()));
            }
        }
        if let Some(tol) = opts.tol {
            if delta < tol {
                quiet += 1;
                if quiet >= CONVERGENCE_WINDOW && converged_at.is_none() {
                    converged_at = Some(k);
                    if opts.stop_when_converged {
                        break;
                    }
                }
            } else {
                quiet = 0;
            }
        }
    }
    Ok(EvolutionResult {
        final_values: current,
        deltas,
        steps,
        dt: tg.dt(),
        critical: opts.critical,
        converged_at,
        argmins,
        frames,
        initial: u0.clone(),
    })
}

/// Discrete `h_{n dt}(source, ·)`: minimal weight of `n`-arc walks.
pub fn finite_time_cost(source: StateId, tg: &TransitionGraph, n: usize) -> Result<GridFunction> {
    let u0 = GridFunction::point_source(tg.len(), source);
    Ok(lo_evolve(&u0, tg, n, None)?.final_values)
}

/// A time-indexed walk through the transition digraph.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCurve {
    pub states: Vec<StateId>,
    pub dt: f64,
}

impl DiscreteCurve {
    /// Sum of arc weights along the curve.
    pub fn action(&self, tg: &TransitionGraph) -> Result<f64> {
        self.states
            .windows(2)
            .map(|w| {
                tg.one_step_cost(w[0], w[1])
                    .ok_or_else(|| Error::Precondition(format!("no arc {:?} -> {:?}", w[0], w[1])))
            })
            .sum()
    }
}

/// Follows the recorded argmins back from `from`; the curve has `steps + 1`
/// states and ends at `from`.
pub fn backtrack_curve(result: &EvolutionResult, from: StateId) -> Result<DiscreteCurve> {
    let argmins = result
        .argmins
        .as_ref()
        .ok_or_else(|| Error::Precondition("argmin tables were not recorded".into()))?;
    if result.final_values.get(from) == UNREACHABLE {
        return Err(Error::Unreachable(from.0));
    }
    let mut states = vec![from];
    let mut cur = from;
    for table in argmins.iter().rev() {
        cur = table[cur.0];
        states.push(cur);
    }
    states.reverse();
    Ok(DiscreteCurve {
        states,
        dt: result.dt,
    })
}

impl EvolutionResult {
    pub fn initial(&self) -> &GridFunction {
        &self.initial
    }
}

/// `max_k |L_v(x_k, v_k) v_k − L(x_k, v_k) − c|` over the steps of a curve,
/// evaluated at the midpoint of every intra-edge segment of each move.
pub fn energy_residual(curve: &DiscreteCurve, tg: &TransitionGraph, c: f64) -> Result<f64> {
    let graph = tg.graph();
    let gl = tg.lagrangian();
    let mut worst: f64 = 0.0;
    for w in curve.states.windows(2) {
        let arc = tg
            .arc(w[0], w[1])
            .ok_or_else(|| Error::Precondition(format!("no arc {:?} -> {:?}", w[0], w[1])))?;
        if arc.is_rest() {
            let (l, lv) = gl.lagrangian_eval(graph, tg.grid().point(w[0]), 0.0)?;
            worst = worst.max((lv * 0.0 - l - c).abs());
            continue;
        }
        let speed = arc.distance / curve.dt;
        for seg in &arc.segments {
            let length = graph.edge(&seg.edge)?.length;
            let tau = 0.5 * (seg.from + seg.to) / length;
            let v = if seg.to >= seg.from { speed } else { -speed };
            let (l, lv) = gl.edge(&seg.edge)?.eval(tau, v);
            worst = worst.max((lv * v - l - c).abs());
        }
    }
    Ok(worst)
}

/// Discrete domination: `u <= T u + c dt + 1e-9` pointwise.
pub fn is_dominated(u: &GridFunction, tg: &TransitionGraph, c: f64) -> bool {
    let (next, _) = lo_step(u, tg);
    u.values()
        .iter()
        .zip(next.values())
        .all(|(a, b)| *a <= b + c * tg.dt() + 1e-9)
}
