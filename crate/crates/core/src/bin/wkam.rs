fn main() {
    std::process::exit(weak_kam_graph::cli::run_command(std::env::args_os()));
}
