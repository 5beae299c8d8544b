fn main() {
    std::process::exit(growdiff::cli::main_with_args(std::env::args_os()));
}
