fn main() {
    std::process::exit(pucci_cli::run_command(std::env::args_os()));
}
