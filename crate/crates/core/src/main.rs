fn main() {
    std::process::exit(ideal_rings::cli::run(std::env::args_os()));
}
