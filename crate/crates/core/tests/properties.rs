use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::prelude::*;

use weak_kam_graph::io::{emit_graph_spec, parse_graph_spec, parse_grid_function, to_csv_string, CsvData};
use weak_kam_graph::weak_kam::{karp_min_mean_cycle, mane_potential, BarrierMatrix, WeightedDigraph};
use weak_kam_graph::{
    critical_value, lo_evolve, lo_step, samples, CriticalMethod, Edge, EdgeLagrangian, GraphLagrangian, GraphPoint,
    Grid, GridFunction, MetricGraph, StateId, TransitionGraph,
};

fn bump() -> &'static TransitionGraph {
    static TG: OnceLock<TransitionGraph> = OnceLock::new();
    TG.get_or_init(|| {
        let (g, gl) = samples::bump();
        TransitionGraph::build(Grid::new(&g, 1.0 / 16.0).unwrap(), gl, 1.0 / 8.0, 4.0).unwrap()
    })
}

fn bump_potential() -> &'static (f64, BarrierMatrix) {
    static PHI: OnceLock<(f64, BarrierMatrix)> = OnceLock::new();
    PHI.get_or_init(|| {
        let tg = bump();
        let c = critical_value(tg, CriticalMethod::MinMeanCycle).unwrap().c;
        let states: Vec<_> = tg.grid().states().collect();
        (c, mane_potential(tg, c, &states).unwrap())
    })
}

fn star() -> MetricGraph {
    MetricGraph::new(
        ["o", "p", "q", "r"],
        vec![
            Edge::new("op", "o", "p", 1.0),
            Edge::new("oq", "o", "q", 0.5),
            Edge::new("or", "o", "r", 1.5),
            Edge::new("pq", "p", "q", 0.75),
        ],
    )
}

fn values(n: usize) -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-3.0f64..3.0, n).prop_map(GridFunction::new)
}

fn star_point() -> impl Strategy<Value = GraphPoint> {
    (0usize..4, 0.0f64..1.0).prop_map(|(e, frac)| {
        let (id, len) = [("op", 1.0), ("oq", 0.5), ("or", 1.5), ("pq", 0.75)][e];
        GraphPoint::new(id, frac * len)
    })
}

fn digraph() -> impl Strategy<Value = WeightedDigraph> {
    (2usize..7).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, -5.0f64..5.0), 1..20).prop_map(move |arcs| {
            let mut g = WeightedDigraph::new(n);
            for i in 0..n {
                g.add_arc(i, (i + 1) % n, 1.0);
            }
            for (u, v, w) in arcs {
                g.add_arc(u, v, w);
            }
            g
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_is_monotone_and_nonexpansive(u in values(bump().len()), v in values(bump().len())) {
        let tg = bump();
        let (tu, _) = lo_step(&u, tg);
        let (tv, _) = lo_step(&v, tg);
        prop_assert!(tu.sup_distance(&tv) <= u.sup_distance(&v) + 1e-12);
        let hi = GridFunction::new(u.values().iter().zip(v.values()).map(|(a, b)| a.max(*b)).collect());
        let (th, _) = lo_step(&hi, tg);
        for (a, b) in tu.values().iter().zip(th.values()) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn step_commutes_with_constants(u in values(bump().len()), a in -10.0f64..10.0) {
        let tg = bump();
        let (tu, _) = lo_step(&u, tg);
        let (ta, _) = lo_step(&u.shifted(a), tg);
        prop_assert!(ta.sup_distance(&tu.shifted(a)) <= 1e-12);
    }

    #[test]
    fn evolution_is_a_semigroup(u in values(bump().len()), m in 1usize..8, k in 1usize..8) {
        let tg = bump();
        let direct = lo_evolve(&u, tg, m + k, None).unwrap().final_values;
        let first = lo_evolve(&u, tg, m, None).unwrap().final_values;
        let composed = lo_evolve(&first, tg, k, None).unwrap().final_values;
        prop_assert!(direct.sup_distance(&composed) <= 1e-12);
    }

    #[test]
    fn distance_is_a_metric(x in star_point(), y in star_point(), z in star_point()) {
        let g = star();
        let d = |p: &GraphPoint, q: &GraphPoint| g.distance(p, q).unwrap();
        prop_assert!(d(&x, &x).abs() <= 1e-15);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        prop_assert!(d(&x, &y) <= g.diameter() + 1e-12);
        let geo = g.geodesic(&x, &y).unwrap();
        prop_assert!((geo.length() - d(&x, &y)).abs() <= 1e-12);
    }

    #[test]
    fn potential_triangle_inequality(x in 0..bump().len(), y in 0..bump().len(), z in 0..bump().len()) {
        let (_, phi) = bump_potential();
        let p = |a: usize, b: usize| phi.get(StateId(a), StateId(b)).unwrap();
        prop_assert!(p(x, z) <= p(x, y) + p(y, z) + 1e-12);
        prop_assert!(p(x, x) == 0.0);
    }

    #[test]
    fn karp_is_below_every_cycle_and_shifts(g in digraph(), shift in -3.0f64..3.0) {
        let mc = karp_min_mean_cycle(&g).unwrap();
        let ring = (0..g.nodes).map(|_| 1.0).sum::<f64>() / g.nodes as f64;
        prop_assert!(mc.mean <= ring + 1e-12);
        let mut shifted = WeightedDigraph::new(g.nodes);
        for &(u, v, w) in &g.arcs {
            shifted.add_arc(u, v, w + shift);
        }
        let ms = karp_min_mean_cycle(&shifted).unwrap();
        prop_assert!((ms.mean - mc.mean - shift).abs() <= 1e-9);
        // the reported cycle attains the mean
        let m = mc.cycle.len();
        let total: f64 = (0..m)
            .map(|i| {
                let (u, v) = (mc.cycle[i], mc.cycle[(i + 1) % m]);
                g.arcs.iter().filter(|a| a.0 == u && a.1 == v).map(|a| a.2).fold(f64::INFINITY, f64::min)
            })
            .sum();
        prop_assert!((total / m as f64 - mc.mean).abs() <= 1e-9);
    }

    #[test]
    fn grid_function_csv_round_trip(u in values(bump().len())) {
        let grid = bump().grid();
        let text = to_csv_string(grid, CsvData::Grid(&u)).unwrap();
        let back = parse_grid_function(grid, &text).unwrap();
        prop_assert_eq!(back, u);
    }

    #[test]
    fn graph_spec_round_trip(
        lengths in prop::collection::vec(0.1f64..3.0, 1..5),
        kinetic in 0.2f64..4.0,
        well in -3.0f64..3.0,
    ) {
        let edges: Vec<Edge> = lengths
            .iter()
            .enumerate()
            .map(|(i, &l)| Edge::new(&format!("e{i}"), "a", if i % 2 == 0 { "b" } else { "c" }, l))
            .collect();
        let g = MetricGraph::new(["a", "b", "c"], edges);
        let mut map = BTreeMap::new();
        for (i, _) in lengths.iter().enumerate() {
            map.insert(format!("e{i}").as_str().into(), EdgeLagrangian::mechanical(kinetic, vec![0.0, well, -well]));
        }
        let gl = GraphLagrangian::new(&g, map).unwrap();
        let text = emit_graph_spec(&g, &gl);
        let spec = parse_graph_spec(&text).unwrap();
        prop_assert_eq!(spec.graph.vertices(), g.vertices());
        prop_assert_eq!(spec.graph.edges(), g.edges());
        prop_assert_eq!(&spec.lagrangian, &gl);
        prop_assert_eq!(spec.emit(), text);
    }
}
