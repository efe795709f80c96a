fn main() {
    std::process::exit(chronoslyap::cli::main_with_args(std::env::args_os()));
}
