fn main() {
    std::process::exit(billiard::cli::main_with_args(std::env::args_os()));
}
