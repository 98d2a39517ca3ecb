fn main() {
    std::process::exit(synthric::cli::main_with_args(std::env::args_os()));
}
