fn main() {
    std::process::exit(plurilab::cli::main_with_args(std::env::args_os()));
}
