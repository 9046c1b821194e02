fn main() {
    std::process::exit(corex::cli::main_with_args(std::env::args_os()));
}
