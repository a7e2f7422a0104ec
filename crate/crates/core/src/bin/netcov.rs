fn main() {
    std::process::exit(netcov::cli::dispatch(std::env::args().collect()));
}
