fn main() {
    std::process::exit(splitkit_cli::run_cli(std::env::args_os()));
}
