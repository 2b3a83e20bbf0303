fn main() {
    std::process::exit(bamp::cli::main_with_args(std::env::args_os()));
}
