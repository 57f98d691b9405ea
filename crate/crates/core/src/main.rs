fn main() {
    std::process::exit(softrec::cli::main_with_args(std::env::args_os()));
}
