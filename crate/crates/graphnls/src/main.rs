fn main() {
    std::process::exit(graphnls::cli::run(std::env::args_os()));
}
