fn main() {
    std::process::exit(treefpp_cli::main_with_args(std::env::args_os()));
}
