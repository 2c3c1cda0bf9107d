fn main() {
    std::process::exit(degenrad::cli::main_with_args(std::env::args_os()));
}
