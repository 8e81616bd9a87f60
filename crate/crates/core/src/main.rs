fn main() {
    std::process::exit(pardpp::cli::run(std::env::args_os()));
}
