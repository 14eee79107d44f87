fn main() {
    let code = hedonic_core::cli::main_with_args(std::env::args_os());
    std::process::exit(code);
}
