fn main() {
    std::process::exit(genrank::cli::run(std::env::args()));
}
