fn main() {
    std::process::exit(epimine::cli::run(std::env::args_os()));
}
