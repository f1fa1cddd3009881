fn main() {
    std::process::exit(wick_fbm::cli::run(std::env::args_os()));
}
