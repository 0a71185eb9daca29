//! The `wkam` command line. Exit codes: 0 success, 1 invalid input or a
//! failed check, 2 numerical diagnostics (Peierls window too short,
//! negative cycle, cross-check beyond tolerance). Diagnostics go to stderr,
//! data to files under `--out`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::discretization::{Grid, GridFunction, StateId, TransitionGraph};
use crate::error::Error;
use crate::io::{load_graph_spec, parse_init, read_grid_function, write_csv, CsvData, GraphSpec};
use crate::lax_oleinik::{lo_evolve_with, Evolve};
use crate::metric_graph::{GraphPoint, Severity};
use crate::viscosity::{check_stationary, ViscosityOptions};
use crate::weak_kam::{
    aubry_set, convergence_run, critical_value, default_aubry_tolerance, mane_potential,
    peierls_barrier, peierls_barrier_auto, weak_kam_solution, AubrySet, BarrierMatrix, CriticalMethod, Window,
};

pub const DEFAULT_DX: f64 = 1.0 / 64.0;
pub const DEFAULT_TOL: f64 = 1e-2;
/// Shortest evolution horizon assumed by the automatic speed cap.
pub const DEFAULT_T_MIN: f64 = 1.0;
pub const DEFAULT_TMAX: f64 = 64.0;
/// Frames written by `evolve`, besides the initial one.
pub const EVOLVE_FRAMES: usize = 8;

#[derive(Parser, Debug)]
#[command(name = "wkam", about = "Weak KAM quantities on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Graph file.
    spec: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DX)]
    dx: f64,
    /// Time step [default: dx / vmax].
    #[arg(long)]
    dt: Option<f64>,
    /// Speed cap [default: 2 diam / t_min with t_min = 1].
    #[arg(long)]
    vmax: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    /// Check tolerance; for `aubry`/`solve`, the Aubry threshold
    /// [default there: 2 |c disagreement| + 1e-3].
    #[arg(long)]
    tol: Option<f64>,
    /// Peierls window `n_min,n_max`.
    #[arg(long)]
    window: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report structural violations of the graph file.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Critical value by both methods.
    Critical {
        #[command(flatten)]
        common: Common,
    },
    /// Peierls barrier `h(source, ·)`, or the full matrix without `--source`.
    Barrier {
        #[command(flatten)]
        common: Common,
        /// `edge:s`
        #[arg(long)]
        source: Option<String>,
    },
    /// Mañé potential `Φ(source, ·)`, or the full matrix without `--source`.
    Potential {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        source: Option<String>,
    },
    /// Aubry set members with `h(x, x)`.
    Aubry {
        #[command(flatten)]
        common: Common,
    },
    /// Lax-Oleinik frames and the gap table to the weak KAM limit.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// `const:x`, `lin:a,b`, `cos:k[,phase]`, `rand:amp` or a CSV path.
        #[arg(long)]
        init: String,
    },
    /// Weak KAM solution reached from `init`, with the Aubry-set cross-check.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        init: String,
    },
    /// Viscosity report for a stationary solution.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        solution: PathBuf,
    },
}

enum Failure {
    Invalid(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NegativeCycle { .. } | Error::Unreachable(_) => Failure::Numerical(e.to_string()),
            Error::Precondition(ref m) if m.contains("Aubry") => Failure::Numerical(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the CLI with `argv` (including the program name) and returns the
/// process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("diagnostic: {m}");
            2
        }
    }
}

fn load(common: &Common) -> std::result::Result<GraphSpec, Failure> {
    load_graph_spec(&common.spec).map_err(|errs| {
        Failure::Invalid(
            errs.iter()
                .map(|e| format!("{}: {e}", common.spec.display()))
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })
}

struct Setup {
    tg: TransitionGraph,
    common: Common,
}

impl Setup {
    fn new(common: &Common) -> std::result::Result<Self, Failure> {
        let spec = load(common)?;
        let fatal: Vec<String> = spec
            .graph
            .validate()
            .into_iter()
            .filter(|v| v.severity() == Severity::Error)
            .map(|v| v.to_string())
            .collect();
        if !fatal.is_empty() {
            return Err(Failure::Invalid(fatal.join("; ")));
        }
        let vmax = common
            .vmax
            .unwrap_or_else(|| 2.0 * spec.graph.diameter() / DEFAULT_T_MIN);
        let dt = common.dt.unwrap_or(common.dx / vmax);
        for (name, v) in [("dx", common.dx), ("dt", dt), ("vmax", vmax)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Failure::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let grid = Grid::new(&spec.graph, common.dx)?;
        let tg = TransitionGraph::build(grid, spec.lagrangian, dt, vmax)?;
        std::fs::create_dir_all(&common.out).map_err(|e| Failure::Invalid(e.to_string()))?;
        Ok(Self {
            tg,
            common: common.clone(),
        })
    }

    fn grid(&self) -> &Grid {
        self.tg.grid()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.common.out.join(name)
    }

    fn write(&self, data: CsvData<'_>, name: &str) -> Outcome {
        let path = self.path(name);
        write_csv(self.grid(), data, &path)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn source(&self, text: &str) -> std::result::Result<StateId, Failure> {
        let (edge, s) = text
            .rsplit_once(':')
            .ok_or_else(|| Failure::Invalid(format!("source must be `edge:s`, got `{text}`")))?;
        let s: f64 = s
            .parse()
            .map_err(|_| Failure::Invalid(format!("bad offset in source `{text}`")))?;
        let p = GraphPoint::new(edge, s);
        let x = self.grid().nearest_state(&p)?;
        let q = self.grid().point(x);
        if !self.tg.graph().same_point(&p, q)? {
            eprintln!("note: source {p} snapped to grid state {q}");
        }
        Ok(x)
    }

    /// Explicit `--window`, or `None` for the sliding default.
    fn window(&self) -> std::result::Result<Option<Window>, Failure> {
        match &self.common.window {
            None => Ok(None),
            Some(w) => {
                let parsed: Option<Vec<usize>> = w.split(',').map(|t| t.trim().parse().ok()).collect();
                match parsed.as_deref() {
                    Some(&[n_min, n_max]) if n_min >= 1 && n_max >= n_min => Ok(Some(Window { n_min, n_max })),
                    _ => Err(Failure::Invalid(format!("window must be `n_min,n_max` with 1 <= n_min <= n_max, got `{w}`"))),
                }
            }
        }
    }

    /// Karp value and its disagreement with the long-time slope.
    fn critical(&self) -> std::result::Result<(f64, f64), Failure> {
        let karp = critical_value(&self.tg, CriticalMethod::MinMeanCycle)?;
        let slope = critical_value(&self.tg, CriticalMethod::long_time(&self.tg))?;
        Ok((karp.c, (karp.c - slope.c).abs()))
    }

    fn barrier(&self, c: f64, sources: &[StateId]) -> std::result::Result<BarrierMatrix, Failure> {
        Ok(match self.window()? {
            Some(w) => peierls_barrier(&self.tg, c, sources, w)?,
            None => peierls_barrier_auto(&self.tg, c, sources)?,
        })
    }

    fn full_barrier(&self, c: f64) -> std::result::Result<BarrierMatrix, Failure> {
        let sources: Vec<StateId> = self.grid().states().collect();
        self.barrier(c, &sources)
    }

    fn aubry(&self, barrier: &BarrierMatrix, disagreement: f64) -> std::result::Result<AubrySet, Failure> {
        let tol = self.common.tol.unwrap_or_else(|| default_aubry_tolerance(disagreement));
        Ok(aubry_set(&barrier.diagonal()?, tol)?)
    }

    fn init(&self, spec: &str) -> std::result::Result<GridFunction, Failure> {
        Ok(parse_init(spec, self.grid(), self.common.seed)?)
    }
}

fn window_verdict(barrier: &BarrierMatrix) -> Outcome {
    if barrier.window.is_adequate() {
        return Ok(());
    }
    let (x, y, n) = barrier.window.flagged[0];
    Err(Failure::Numerical(format!(
        "Peierls window too short: {} pairs attain their minimum at a window edge (first: {:?} -> {:?} at n = {n}); widen --window",
        barrier.window.flagged.len(),
        x,
        y
    )))
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate { common } => validate(&common),
        Command::Critical { common } => {
            let s = Setup::new(&common)?;
            let karp = critical_value(&s.tg, CriticalMethod::MinMeanCycle)?;
            let slope = critical_value(&s.tg, CriticalMethod::long_time(&s.tg))?;
            let gap = (karp.c - slope.c).abs();
            println!("min_mean_cycle {}", karp.c);
            println!("long_time_slope {}", slope.c);
            println!("disagreement {gap}");
            let text = format!("method,c\nmin_mean_cycle,{}\nlong_time_slope,{}\n", karp.c, slope.c);
            let path = s.path("critical.csv");
            std::fs::write(&path, text).map_err(|e| Failure::Invalid(e.to_string()))?;
            if let crate::weak_kam::Diagnostics::SlopeFit { converged: false, residual, .. } = slope.diagnostics {
                eprintln!("warning: slope fit residual {residual:e}; the long-time estimate may not have settled");
            }
            Ok(())
        }
        Command::Barrier { common, source } => {
            let s = Setup::new(&common)?;
            let (c, _) = s.critical()?;
            match source {
                Some(src) => {
                    let b = s.barrier(c, &[s.source(&src)?])?;
                    s.write(CsvData::Grid(&b.values[0]), "barrier.csv")?;
                    window_verdict(&b)
                }
                None => {
                    let b = s.full_barrier(c)?;
                    s.write(CsvData::Matrix(&b), "barrier.csv")?;
                    window_verdict(&b)
                }
            }
        }
        Command::Potential { common, source } => {
            let s = Setup::new(&common)?;
            let (c, _) = s.critical()?;
            match source {
                Some(src) => {
                    let m = mane_potential(&s.tg, c, &[s.source(&src)?])?;
                    s.write(CsvData::Grid(&m.values[0]), "potential.csv")
                }
                None => {
                    let states: Vec<_> = s.tg.grid().states().collect();
                    let m = mane_potential(&s.tg, c, &states)?;
                    s.write(CsvData::Matrix(&m), "potential.csv")
                }
            }
        }
        Command::Aubry { common } => {
            let s = Setup::new(&common)?;
            let (c, gap) = s.critical()?;
            let b = s.full_barrier(c)?;
            let a = s.aubry(&b, gap)?;
            println!("members {} tolerance {}", a.members.len(), a.tolerance);
            s.write(CsvData::Aubry(&a), "aubry.csv")?;
            window_verdict(&b)
        }
        Command::Evolve { common, init } => {
            let s = Setup::new(&common)?;
            let u0 = s.init(&init)?;
            let (c, gap) = s.critical()?;
            let b = s.full_barrier(c)?;
            let a = s.aubry(&b, gap)?;
            let v = weak_kam_solution(&u0, &b, &a)?;
            let steps = (common.tmax.unwrap_or(DEFAULT_TMAX) / s.tg.dt()).round().max(1.0) as usize;
            let every = (steps / EVOLVE_FRAMES).max(1);
            let run = lo_evolve_with(
                &u0,
                &s.tg,
                &Evolve {
                    steps,
                    critical: Some(c),
                    frame_every: Some(every),
                    ..Default::default()
                },
            )?;
            for (k, f) in &run.frames {
                s.write(CsvData::Grid(f), &format!("frame_{k:06}.csv"))?;
            }
            let table = convergence_run(&u0, &s.tg, c, &v.full, steps, (steps / 64).max(1))?;
            s.write(CsvData::Gaps(&table), "gaps.csv")?;
            println!("final_gap {}", table.final_gap);
            window_verdict(&b)
        }
        Command::Solve { common, init } => {
            let s = Setup::new(&common)?;
            let u0 = s.init(&init)?;
            let (c, gap) = s.critical()?;
            let b = s.full_barrier(c)?;
            let a = s.aubry(&b, gap)?;
            let v = weak_kam_solution(&u0, &b, &a)?;
            s.write(CsvData::Grid(&v.full), "solution.csv")?;
            s.write(CsvData::Aubry(&a), "aubry.csv")?;
            println!("c {c}");
            println!("representation_difference {}", v.max_difference);
            window_verdict(&b)?;
            let tol = common.tol.unwrap_or(DEFAULT_TOL);
            if v.max_difference > tol {
                return Err(Failure::Numerical(format!(
                    "Aubry-set representation differs by {:e} > {tol:e}",
                    v.max_difference
                )));
            }
            Ok(())
        }
        Command::Check { common, solution } => {
            let s = Setup::new(&common)?;
            let u = read_solution(s.grid(), &solution)?;
            let (c, _) = s.critical()?;
            let tol = common.tol.unwrap_or(DEFAULT_TOL);
            let report = check_stationary(&u, s.tg.lagrangian(), s.grid(), c, tol, &ViscosityOptions::for_grid(s.grid()))?;
            s.write(CsvData::Viscosity(&report), "viscosity.csv")?;
            println!("sub_residual {}", report.sub_residual);
            println!("super_residual {}", report.super_residual);
            println!("pass {}", report.pass);
            if report.pass {
                Ok(())
            } else {
                Err(Failure::Invalid(format!(
                    "not a viscosity solution at tol {tol}: sub {:e}, super {:e}",
                    report.sub_residual, report.super_residual
                )))
            }
        }
    }
}

fn read_solution(grid: &Grid, path: &Path) -> std::result::Result<GridFunction, Failure> {
    Ok(read_grid_function(grid, path)?)
}

fn validate(common: &Common) -> Outcome {
    let spec = load(common)?;
    let violations = spec.graph.validate();
    let mut fatal = false;
    for v in &violations {
        let level = match v.severity() {
            Severity::Error => {
                fatal = true;
                "error"
            }
            Severity::Warning => "warning",
        };
        eprintln!("{level}: {v}");
    }
    if spec.graph.is_usable() {
        if let Ok(report) = spec.lagrangian.check_symmetric_at_vertices(&spec.graph) {
            for v in report.vertices.iter().filter(|v| !v.symmetric) {
                eprintln!("note: Lagrangian not symmetric at vertex {} (deviation {:e})", v.vertex, v.max_deviation);
            }
        }
    }
    if fatal {
        return Err(Failure::Invalid(format!("{} violation(s)", violations.len())));
    }
    println!(
        "ok: {} vertices, {} edges",
        spec.graph.vertices().len(),
        spec.graph.edges().len()
    );
    Ok(())
}
