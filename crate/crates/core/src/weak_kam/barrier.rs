//! Mañé potential, Peierls barrier and the Aubry set.
//!
//! With corrected weights `w' = w + c dt` the transition digraph has no
//! negative cycle. The potential is the shortest-path distance in that
//! digraph (walks of any length, including the empty walk). The barrier is
//! the minimum of the corrected `n`-step action over a window
//! `n_min <= n <= n_max`, the computable stand-in for the `liminf`.

use rayon::prelude::*;

use crate::discretization::{GridFunction, StateId, TransitionGraph, UNREACHABLE};
use crate::error::{Error, Result};
use crate::lax_oleinik::{backtrack_curve, lo_evolve_with, step_shifted, DiscreteCurve, Evolve};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BarrierKind {
    Mane,
    Peierls,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub n_min: usize,
    pub n_max: usize,
}

/// `n_min dt >= 4 diam / vmax`, and a window of `4 |states|` further steps.
pub fn default_window(tg: &TransitionGraph) -> Window {
    let diam = tg.graph().diameter();
    let n_min = ((4.0 * diam / (tg.vmax() * tg.dt())) - 1e-9).ceil().max(1.0) as usize;
    Window {
        n_min,
        n_max: n_min + 4 * tg.len(),
    }
}

/// Step cap for [`peierls_barrier_sliding`]: `64 |states|` past the default window.
pub fn default_max_steps(tg: &TransitionGraph) -> usize {
    default_window(tg).n_max + 64 * tg.len()
}

/// Pairs whose windowed minimum is attained only at a window edge.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WindowReport {
    /// Final window of every source, in source order.
    pub windows: Vec<Window>,
    /// `(source, target, minimizing n)`.
    pub flagged: Vec<(StateId, StateId, usize)>,
}

impl WindowReport {
    pub fn is_adequate(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Rows of `Φ(source, ·)` or `h(source, ·)` over every grid state.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierMatrix {
    pub kind: BarrierKind,
    pub sources: Vec<StateId>,
    pub values: Vec<GridFunction>,
    pub window: WindowReport,
}

impl BarrierMatrix {
    pub fn row(&self, source: StateId) -> Option<&GridFunction> {
        self.sources
            .iter()
            .position(|&s| s == source)
            .map(|i| &self.values[i])
    }

    pub fn get(&self, source: StateId, target: StateId) -> Option<f64> {
        self.row(source).map(|r| r.get(target))
    }

    /// True when every state is a source and rows are in state order.
    pub fn is_complete(&self) -> bool {
        let n = self.values.first().map_or(0, GridFunction::len);
        self.sources.len() == n && self.sources.iter().enumerate().all(|(i, s)| s.0 == i)
    }

    fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::Precondition(
                "operation needs the barrier from every source state".into(),
            ))
        }
    }

    /// `value(x, x)` for every state.
    pub fn diagonal(&self) -> Result<Vec<f64>> {
        self.require_complete()?;
        Ok(self.values.iter().enumerate().map(|(i, r)| r.values()[i]).collect())
    }

    /// `value(·, target)` for every state.
    pub fn column(&self, target: StateId) -> Result<GridFunction> {
        self.require_complete()?;
        Ok(GridFunction::new(
            self.values.iter().map(|r| r.get(target)).collect(),
        ))
    }
}

/// Negative-cycle tolerance: `10 ε |states| max(1, max |w'|)`.
pub fn negative_cycle_tolerance(tg: &TransitionGraph, c: f64) -> f64 {
    let shift = c * tg.dt();
    let scale = tg
        .arcs()
        .iter()
        .map(|a| (a.weight + shift).abs())
        .fold(1.0, f64::max);
    10.0 * f64::EPSILON * tg.len() as f64 * scale
}

/// Shortest paths from each source in the `c`-corrected digraph
/// (Bellman-Ford by rounds, capped at `|states|` rounds).
pub fn mane_potential(tg: &TransitionGraph, c: f64, sources: &[StateId]) -> Result<BarrierMatrix> {
    let eps = negative_cycle_tolerance(tg, c);
    let shift = c * tg.dt();
    let rows: Vec<GridFunction> = sources
        .par_iter()
        .map(|&s| shortest_from(tg, s, shift, eps))
        .collect::<Result<_>>()?;
    Ok(BarrierMatrix {
        kind: BarrierKind::Mane,
        sources: sources.to_vec(),
        values: rows,
        window: WindowReport::default(),
    })
}

fn shortest_from(tg: &TransitionGraph, source: StateId, shift: f64, eps: f64) -> Result<GridFunction> {
    let n = tg.len();
    let mut dist = GridFunction::point_source(n, source).into_values();
    let mut next = vec![0.0; n];
    for _round in 0..n {
        step_shifted(&dist, tg, shift, &mut next);
        let mut changed = false;
        for (d, cand) in dist.iter_mut().zip(&next) {
            if *cand < *d {
                *d = *cand;
                changed = true;
            }
        }
        if !changed {
            return Ok(GridFunction::new(dist));
        }
    }
    step_shifted(&dist, tg, shift, &mut next);
    let worst = dist
        .iter()
        .zip(&next)
        .filter(|(d, _)| **d != UNREACHABLE)
        .map(|(d, c)| c - d)
        .fold(0.0, f64::min);
    if worst < -eps {
        return Err(Error::NegativeCycle {
            weight: worst,
            tolerance: eps,
        });
    }
    Ok(GridFunction::new(dist))
}

/// A walk realizing `Φ(source, target)` among walks of `1..=max_steps`
/// arcs: the shortest length attaining the minimum of `h_n + n c dt`.
pub fn mane_minimizer(
    tg: &TransitionGraph,
    c: f64,
    source: StateId,
    target: StateId,
    max_steps: usize,
) -> Result<DiscreteCurve> {
    let u0 = GridFunction::point_source(tg.len(), source);
    let scan = lo_evolve_with(
        &u0,
        tg,
        &Evolve {
            steps: max_steps,
            critical: Some(c),
            frame_every: Some(1),
            ..Default::default()
        },
    )?;
    let mut best: Option<(usize, f64)> = None;
    for (n, f) in scan.frames.iter().skip(1) {
        let v = f.get(target);
        let tie = 1e-12 * v.abs().max(1.0);
        if v != UNREACHABLE && best.is_none_or(|(_, b)| v < b - tie) {
            best = Some((*n, v));
        }
    }
    let (steps, _) = best.ok_or(Error::Unreachable(target.0))?;
    let run = lo_evolve_with(
        &u0,
        tg,
        &Evolve {
            steps,
            critical: Some(c),
            record_argmin: true,
            ..Default::default()
        },
    )?;
    backtrack_curve(&run, target)
}

/// Windowed minimum of `h_{n dt}(source, ·) + n c dt` over the window.
pub fn peierls_barrier(
    tg: &TransitionGraph,
    c: f64,
    sources: &[StateId],
    window: Window,
) -> Result<BarrierMatrix> {
    peierls_barrier_sliding(tg, c, sources, window, window.n_max)
}

/// Like [`peierls_barrier`], but a source whose minimum sits on a window
/// edge keeps evolving: the window moves to the next `n_max − n_min` steps
/// until every target is interior or `max_steps` would be exceeded.
pub fn peierls_barrier_sliding(
    tg: &TransitionGraph,
    c: f64,
    sources: &[StateId],
    window: Window,
    max_steps: usize,
) -> Result<BarrierMatrix> {
    if window.n_min == 0 || window.n_max < window.n_min {
        return Err(Error::Config(format!(
            "invalid Peierls window [{}, {}]",
            window.n_min, window.n_max
        )));
    }
    let shift = c * tg.dt();
    let rows: Vec<Windowed> = sources
        .par_iter()
        .map(|&s| windowed_min(tg, s, shift, window, max_steps))
        .collect();
    let mut report = WindowReport::default();
    let mut values = Vec::with_capacity(rows.len());
    for row in rows {
        values.push(row.values);
        report.windows.push(row.window);
        report.flagged.extend(row.flagged);
    }
    Ok(BarrierMatrix {
        kind: BarrierKind::Peierls,
        sources: sources.to_vec(),
        values,
        window: report,
    })
}

/// [`peierls_barrier_sliding`] from [`default_window`] up to [`default_max_steps`].
pub fn peierls_barrier_auto(tg: &TransitionGraph, c: f64, sources: &[StateId]) -> Result<BarrierMatrix> {
    peierls_barrier_sliding(tg, c, sources, default_window(tg), default_max_steps(tg))
}

struct Windowed {
    values: GridFunction,
    window: Window,
    flagged: Vec<(StateId, StateId, usize)>,
}

fn windowed_min(tg: &TransitionGraph, source: StateId, shift: f64, window: Window, max_steps: usize) -> Windowed {
    let len = tg.len();
    let span = window.n_max - window.n_min;
    let mut window = window;
    let mut u = GridFunction::point_source(len, source).into_values();
    let mut next = vec![0.0; len];
    let mut best = vec![UNREACHABLE; len];
    let mut first = vec![0usize; len];
    let mut last = vec![0usize; len];
    let mut n = 0;
    loop {
        n += 1;
        step_shifted(&u, tg, shift, &mut next);
        std::mem::swap(&mut u, &mut next);
        if n < window.n_min {
            continue;
        }
        for y in 0..len {
            let v = u[y];
            if v == UNREACHABLE {
                continue;
            }
            let tie = 1e-12 * best[y].abs().max(1.0);
            if best[y] == UNREACHABLE || v < best[y] - tie {
                best[y] = v;
                first[y] = n;
                last[y] = n;
            } else if v <= best[y] + tie {
                last[y] = n;
            }
        }
        if n < window.n_max {
            continue;
        }
        let flagged = edge_minima(source, &best, &first, &last, window);
        let next_max = window.n_max + 1 + span;
        if flagged.is_empty() || span == 0 || next_max > max_steps {
            return Windowed {
                values: GridFunction::new(best),
                window,
                flagged,
            };
        }
        window = Window {
            n_min: window.n_max + 1,
            n_max: next_max,
        };
        best.fill(UNREACHABLE);
    }
}

fn edge_minima(
    source: StateId,
    best: &[f64],
    first: &[usize],
    last: &[usize],
    window: Window,
) -> Vec<(StateId, StateId, usize)> {
    if window.n_max == window.n_min {
        return Vec::new();
    }
    (0..best.len())
        .filter(|&y| best[y] != UNREACHABLE)
        .filter(|&y| {
            let only_low = first[y] == window.n_min && last[y] == window.n_min;
            only_low || first[y] == window.n_max
        })
        .map(|y| (source, StateId(y), first[y]))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AubrySet {
    pub members: Vec<StateId>,
    pub tolerance: f64,
    /// `h(x, x)` for every state.
    pub diagonal: Vec<f64>,
    /// Largest accepted and smallest rejected `h(x, x)`.
    pub margin: (f64, f64),
}

impl AubrySet {
    pub fn contains(&self, x: StateId) -> bool {
        self.members.binary_search(&x).is_ok()
    }
}

/// `{x : h(x, x) <= tol}`. An empty result is an error: the set is
/// nonempty in the continuum, so the grid or window needs refinement.
pub fn aubry_set(diagonal: &[f64], tol: f64) -> Result<AubrySet> {
    let mut members = Vec::new();
    let mut accepted = f64::NEG_INFINITY;
    let mut rejected = f64::INFINITY;
    for (i, &h) in diagonal.iter().enumerate() {
        if h <= tol {
            members.push(StateId(i));
            accepted = accepted.max(h);
        } else {
            rejected = rejected.min(h);
        }
    }
    if members.is_empty() {
        return Err(Error::Precondition(format!(
            "empty Aubry set at tolerance {tol:e} (smallest h(x,x) = {rejected:e}); refine the grid or widen the window"
        )));
    }
    Ok(AubrySet {
        members,
        tolerance: tol,
        diagonal: diagonal.to_vec(),
        margin: (accepted, rejected),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Grid;
    use crate::metric_graph::GraphPoint;
    use crate::samples;
    use crate::weak_kam::{critical_value, CriticalMethod};

    fn coarse(sample: fn() -> (crate::MetricGraph, crate::GraphLagrangian)) -> (TransitionGraph, f64) {
        let (g, gl) = sample();
        let tg = TransitionGraph::build(Grid::new(&g, 0.125).unwrap(), gl, 0.25, 4.0).unwrap();
        let c = critical_value(&tg, CriticalMethod::MinMeanCycle).unwrap().c;
        (tg, c)
    }

    fn all(tg: &TransitionGraph) -> Vec<StateId> {
        tg.grid().states().collect()
    }

    #[test]
    fn free_edge_potential_counts_cells() {
        let (tg, c) = coarse(samples::free_edge);
        assert_eq!(c, 0.0);
        let a = tg.grid().state_at(&GraphPoint::new("e1", 0.0)).unwrap();
        let phi = mane_potential(&tg, c, &[a]).unwrap();
        let per_cell = 0.125f64.powi(2) / (2.0 * 0.25);
        for k in 0..=8 {
            let x = tg.grid().state_at(&GraphPoint::new("e1", k as f64 * 0.125)).unwrap();
            assert!((phi.get(a, x).unwrap() - k as f64 * per_cell).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn potential_vanishes_on_diagonal_and_bounds_barrier() {
        let (tg, c) = coarse(samples::bump);
        let phi = mane_potential(&tg, c, &all(&tg)).unwrap();
        let h = peierls_barrier_auto(&tg, c, &all(&tg)).unwrap();
        assert!(h.window.is_adequate());
        assert!(phi.diagonal().unwrap().iter().all(|v| *v == 0.0));
        for (rp, rh) in phi.values.iter().zip(&h.values) {
            for (p, q) in rp.values().iter().zip(rh.values()) {
                assert!(p <= &(q + 1e-12));
            }
        }
    }

    #[test]
    fn sliding_window_settles_flagged_sources() {
        let (tg, c) = coarse(samples::bump);
        let short = Window { n_min: 1, n_max: 2 };
        let fixed = peierls_barrier(&tg, c, &all(&tg), short).unwrap();
        assert!(!fixed.window.flagged.is_empty());
        let slid = peierls_barrier_sliding(&tg, c, &all(&tg), short, 4096).unwrap();
        let auto = peierls_barrier_auto(&tg, c, &all(&tg)).unwrap();
        assert!(slid.window.flagged.len() < fixed.window.flagged.len());
        for (a, b) in slid.values.iter().zip(&auto.values) {
            assert!(a.sup_distance(b) < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_windows() {
        let (tg, c) = coarse(samples::bump);
        let bad = [Window { n_min: 0, n_max: 4 }, Window { n_min: 5, n_max: 4 }];
        for w in bad {
            assert!(matches!(peierls_barrier(&tg, c, &[StateId(0)], w), Err(Error::Config(_))));
        }
    }

    #[test]
    fn minimizer_realizes_potential() {
        let (tg, c) = coarse(samples::bump);
        let a = tg.grid().state_at(&GraphPoint::new("e1", 0.0)).unwrap();
        let top = tg.grid().state_at(&GraphPoint::new("e2", 0.5)).unwrap();
        let phi = mane_potential(&tg, c, &[a]).unwrap().get(a, top).unwrap();
        let walk = mane_minimizer(&tg, c, a, top, default_max_steps(&tg)).unwrap();
        assert_eq!(walk.states.first(), Some(&a));
        assert_eq!(walk.states.last(), Some(&top));
        let n = (walk.states.len() - 1) as f64;
        assert!((walk.action(&tg).unwrap() + n * c * tg.dt() - phi).abs() < 1e-12);
    }

    #[test]
    fn aubry_membership_and_margin() {
        let set = aubry_set(&[0.0, 0.3, 0.05, 1.0], 0.1).unwrap();
        assert_eq!(set.members, vec![StateId(0), StateId(2)]);
        assert!(set.contains(StateId(2)) && !set.contains(StateId(1)));
        assert_eq!(set.margin, (0.05, 0.3));
        assert!(matches!(aubry_set(&[0.5, 0.2], 0.1), Err(Error::Precondition(_))));
    }

    #[test]
    fn partial_matrix_has_no_diagonal() {
        let (tg, c) = coarse(samples::bump);
        let phi = mane_potential(&tg, c, &[StateId(1)]).unwrap();
        assert!(!phi.is_complete());
        assert!(phi.diagonal().is_err());
        assert_eq!(phi.row(StateId(0)), None);
    }
}
