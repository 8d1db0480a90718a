fn main() {
    std::process::exit(stylm::cli::run(std::env::args_os()));
}
