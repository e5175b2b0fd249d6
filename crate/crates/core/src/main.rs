fn main() {
    std::process::exit(kdlab::cli::main_with_args(std::env::args_os()));
}
