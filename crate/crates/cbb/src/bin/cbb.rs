fn main() {
    std::process::exit(cbb::cli::run(std::env::args_os()));
}
