fn main() {
    std::process::exit(specnet::cli::run_cli(std::env::args_os()));
}
