fn main() {
    std::process::exit(noncoh::cli::run(std::env::args().collect()));
}
