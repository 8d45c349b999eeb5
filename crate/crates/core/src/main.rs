fn main() {
    std::process::exit(rlaug::cli::run(std::env::args_os()));
}
