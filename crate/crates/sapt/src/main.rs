fn main() {
    std::process::exit(sapt::cli::main_with_args(std::env::args_os()));
}
