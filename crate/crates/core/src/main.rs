fn main() {
    std::process::exit(qensemble::cli::run(std::env::args_os()));
}
