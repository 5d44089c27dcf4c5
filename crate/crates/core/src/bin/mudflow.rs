fn main() {
    std::process::exit(mudflow::io::cli::run_cli(std::env::args_os()));
}
