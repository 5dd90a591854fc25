fn main() {
    std::process::exit(stcdm::cli::run(std::env::args_os()));
}
