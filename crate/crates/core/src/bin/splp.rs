fn main() {
    std::process::exit(splp::harness::cli::run(std::env::args_os()));
}
