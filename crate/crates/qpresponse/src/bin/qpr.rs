fn main() {
    std::process::exit(qpresponse::cli::run_cli(std::env::args()));
}
