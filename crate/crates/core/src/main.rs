fn main() {
    std::process::exit(spreadlab::cli::main_with_args(std::env::args_os()));
}
