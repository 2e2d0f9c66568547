fn main() {
    std::process::exit(thetalab_cli::main_with_args(std::env::args_os()));
}
