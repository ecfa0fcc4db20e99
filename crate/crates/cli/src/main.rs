fn main() {
    std::process::exit(qedr_cli::run_with(std::env::args_os().collect()));
}
