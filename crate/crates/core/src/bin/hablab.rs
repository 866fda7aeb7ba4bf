fn main() {
    std::process::exit(hablab::cli::run(std::env::args_os()));
}
