//! Distances and shortest paths on a star with legs of different length.

use weak_kam_graph::io::load_graph_spec;
use weak_kam_graph::GraphPoint;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/y.graph");
    let spec = load_graph_spec(path.as_ref()).unwrap_or_else(|errs| {
        for e in errs {
            eprintln!("{e}");
        }
        std::process::exit(1);
    });
    let g = &spec.graph;
    println!("diameter {}", g.diameter());

    let pairs = [
        (GraphPoint::new("op", 0.25), GraphPoint::new("or", 1.0)),
        (GraphPoint::new("oq", 0.5), GraphPoint::new("or", 1.5)),
        (GraphPoint::new("op", 0.2), GraphPoint::new("op", 0.9)),
    ];
    for (x, y) in &pairs {
        let geo = g.geodesic(x, y).unwrap();
        println!("{x:?} -> {y:?}: d = {}", g.distance(x, y).unwrap());
        for seg in &geo.segments {
            println!("    {} {:.3} -> {:.3}", seg.edge, seg.from, seg.to);
        }
    }

    // vertex points are canonical whichever edge names them
    let o1 = GraphPoint::new("op", 0.0);
    let o2 = GraphPoint::new("or", 0.0);
    println!("same point: {}", g.same_point(&o1, &o2).unwrap());
}
