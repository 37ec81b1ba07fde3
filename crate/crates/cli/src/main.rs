fn main() {
    let code = rflight_cli::run(std::env::args_os());
    std::process::exit(code);
}
