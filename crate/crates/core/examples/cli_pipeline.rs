//! The `wkam` subcommands driven in-process on a graph file, writing CSV
//! artifacts into a scratch directory.

use weak_kam_graph::cli::run_command;

fn main() {
    let spec = concat!(env!("CARGO_MANIFEST_DIR"), "/data/g2.graph");
    let out = std::env::temp_dir().join(format!("wkam-pipeline-{}", std::process::id()));
    let out_s = out.to_str().unwrap();
    let common = ["--dx", "0.03125", "--dt", "0.125", "--out", out_s];
    let steps: [&[&str]; 5] = [
        &["validate", spec],
        &["critical", spec],
        &["aubry", spec],
        &["solve", spec, "--init", "cos:3"],
        &["check", spec, "--tol", "0.1", "--solution", &format!("{out_s}/solution.csv")],
    ];
    for args in steps {
        let mut argv = vec!["wkam"];
        argv.extend_from_slice(args);
        if args[0] != "validate" {
            argv.extend_from_slice(&common);
        }
        println!("$ {}", argv[1..].join(" "));
        let code = run_command(argv);
        println!("exit {code}");
    }
    let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    println!("artifacts in {out_s}: {files:?}");
    std::fs::remove_dir_all(&out).ok();
}
