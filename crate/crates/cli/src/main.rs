fn main() {
    std::process::exit(hv_cli::main_with_args(std::env::args_os()));
}
