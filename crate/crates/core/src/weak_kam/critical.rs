//! The critical value `c`.
//!
//! A closed discrete curve `x_0 -> ... -> x_m = x_0` satisfies
//! `Σ (w + k dt) >= 0` for every cycle iff `k >= −μ*/dt`, where `μ*` is the
//! minimum mean arc weight over directed cycles. Karp's recurrence gives
//! `μ*` exactly; the long-time slope of `min_x T^n 0` is an independent
//! cross-check.

use crate::discretization::{GridFunction, StateId, TransitionGraph};
use crate::error::{Error, Result};
use crate::lax_oleinik::step_shifted;

/// Plain arc-weighted digraph on nodes `0..nodes`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedDigraph {
    pub nodes: usize,
    pub arcs: Vec<(usize, usize, f64)>,
}

impl WeightedDigraph {
    pub fn new(nodes: usize) -> Self {
        Self {
            nodes,
            arcs: Vec::new(),
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, weight: f64) {
        self.arcs.push((from, to, weight));
    }
}

impl From<&TransitionGraph> for WeightedDigraph {
    fn from(tg: &TransitionGraph) -> Self {
        Self {
            nodes: tg.len(),
            arcs: tg.arcs().iter().map(|a| (a.from.0, a.to.0, a.weight)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanCycle {
    /// Minimum mean arc weight `μ*`.
    pub mean: f64,
    /// A cycle attaining (up to rounding) the minimum: `[v_0, ..., v_{m-1}]`,
    /// closing back to `v_0`.
    pub cycle: Vec<usize>,
}

/// Karp's minimum mean cycle. `None` when the digraph is acyclic.
pub fn karp_min_mean_cycle(g: &WeightedDigraph) -> Option<MeanCycle> {
    let n = g.nodes;
    if n == 0 {
        return None;
    }
    // dist[k][v]: minimum weight of a k-arc walk ending at v (any start)
    let mut dist = vec![vec![f64::INFINITY; n]; n + 1];
    let mut pred = vec![vec![usize::MAX; n]; n + 1];
    dist[0].fill(0.0);
    for k in 1..=n {
        let (prev, cur) = dist.split_at_mut(k);
        let (prev, cur) = (&prev[k - 1], &mut cur[0]);
        for &(u, v, w) in &g.arcs {
            if prev[u].is_finite() {
                let cand = prev[u] + w;
                if cand < cur[v] {
                    cur[v] = cand;
                    pred[k][v] = u;
                }
            }
        }
    }
    let mut best: Option<(f64, usize)> = None;
    for v in 0..n {
        if !dist[n][v].is_finite() {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| dist[k][v].is_finite())
            .map(|k| (dist[n][v] - dist[k][v]) / (n - k) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        if best.is_none_or(|(b, _)| worst < b) {
            best = Some((worst, v));
        }
    }
    let (mean, end) = best?;

    // The n-arc walk into `end` contains a cycle; report the lightest one on it.
    let mut walk = vec![end];
    let mut v = end;
    for k in (1..=n).rev() {
        v = pred[k][v];
        walk.push(v);
    }
    walk.reverse();
    let weight = |u: usize, v: usize| {
        g.arcs
            .iter()
            .filter(|a| a.0 == u && a.1 == v)
            .map(|a| a.2)
            .fold(f64::INFINITY, f64::min)
    };
    let mut last_seen = vec![usize::MAX; n];
    let mut cycle = Vec::new();
    let mut cycle_mean = f64::INFINITY;
    for (i, &node) in walk.iter().enumerate() {
        let j = last_seen[node];
        if j != usize::MAX {
            let nodes = &walk[j..i];
            let total: f64 = (j..i).map(|t| weight(walk[t], walk[t + 1])).sum();
            let m = total / nodes.len() as f64;
            if m < cycle_mean {
                cycle_mean = m;
                cycle = nodes.to_vec();
            }
        }
        last_seen[node] = i;
    }
    Some(MeanCycle { mean, cycle })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalMethod {
    MinMeanCycle,
    /// Fit the slope of `min_x T^k 0` over the second half of `steps` steps.
    LongTimeSlope { steps: usize },
}

impl CriticalMethod {
    /// Long-time slope with the default horizon for this transition graph.
    pub fn long_time(tg: &TransitionGraph) -> Self {
        CriticalMethod::LongTimeSlope {
            steps: (4 * tg.len()).max(64),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostics {
    Cycle { states: Vec<StateId>, mean_weight: f64 },
    SlopeFit { steps: usize, residual: f64, converged: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalValue {
    pub c: f64,
    pub method: CriticalMethod,
    pub diagnostics: Diagnostics,
}

/// RMS residual of the slope fit above which the fit is flagged.
pub const SLOPE_RESIDUAL_TOL: f64 = 1e-6;

pub fn critical_value(tg: &TransitionGraph, method: CriticalMethod) -> Result<CriticalValue> {
    match method {
        CriticalMethod::MinMeanCycle => {
            let mc = karp_min_mean_cycle(&WeightedDigraph::from(tg))
                .ok_or_else(|| Error::Precondition("transition graph has no cycle".into()))?;
            Ok(CriticalValue {
                c: -mc.mean / tg.dt(),
                method,
                diagnostics: Diagnostics::Cycle {
                    states: mc.cycle.into_iter().map(StateId).collect(),
                    mean_weight: mc.mean,
                },
            })
        }
        CriticalMethod::LongTimeSlope { steps } => {
            if steps < 4 {
                return Err(Error::Precondition("slope fit needs at least 4 steps".into()));
            }
            let mut u = GridFunction::constant(tg.len(), 0.0).into_values();
            let mut next = vec![0.0; u.len()];
            let mut minima = Vec::with_capacity(steps + 1);
            minima.push(0.0);
            for _ in 0..steps {
                step_shifted(&u, tg, 0.0, &mut next);
                std::mem::swap(&mut u, &mut next);
                minima.push(u.iter().copied().fold(f64::INFINITY, f64::min));
            }
            let (slope, residual) = fit_line(&minima[steps / 2..], steps / 2);
            let scale = minima.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            Ok(CriticalValue {
                c: -slope / tg.dt(),
                method,
                diagnostics: Diagnostics::SlopeFit {
                    steps,
                    residual,
                    converged: residual <= SLOPE_RESIDUAL_TOL * scale,
                },
            })
        }
    }
}

/// Least-squares slope of `ys[i]` against `offset + i`, and the RMS residual.
fn fit_line(ys: &[f64], offset: usize) -> (f64, f64) {
    let n = ys.len() as f64;
    let xs: Vec<f64> = (0..ys.len()).map(|i| (offset + i) as f64).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum();
    (slope, (rss / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_cycle() {
        let mut g = WeightedDigraph::new(2);
        g.add_arc(0, 1, 1.0);
        g.add_arc(1, 0, 3.0);
        let mc = karp_min_mean_cycle(&g).unwrap();
        assert_eq!(mc.mean, 2.0);
        assert_eq!(mc.cycle.len(), 2);
    }

    #[test]
    fn picks_lighter_cycle_and_self_loop() {
        let mut g = WeightedDigraph::new(3);
        g.add_arc(0, 1, 1.0);
        g.add_arc(1, 0, 1.0);
        g.add_arc(1, 2, 5.0);
        g.add_arc(2, 2, -0.5);
        let mc = karp_min_mean_cycle(&g).unwrap();
        assert_eq!(mc.mean, -0.5);
        assert_eq!(mc.cycle, vec![2]);
    }

    #[test]
    fn acyclic_has_no_cycle() {
        let mut g = WeightedDigraph::new(3);
        g.add_arc(0, 1, 1.0);
        g.add_arc(1, 2, 1.0);
        assert!(karp_min_mean_cycle(&g).is_none());
    }

    #[test]
    fn line_fit() {
        let ys: Vec<f64> = (5..20).map(|k| 2.0 - 0.25 * k as f64).collect();
        let (slope, res) = fit_line(&ys, 5);
        assert!((slope + 0.25).abs() < 1e-14);
        assert!(res < 1e-12);
    }
}
