fn main() {
    std::process::exit(paralex::cli::run(std::env::args_os()));
}
