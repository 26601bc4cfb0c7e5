fn main() {
    std::process::exit(mfbo::cli::main_with_args(std::env::args_os()));
}
