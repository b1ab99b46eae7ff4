fn main() {
    let code = subbergman::cli::main(std::env::args_os());
    std::process::exit(code);
}
