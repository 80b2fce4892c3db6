fn main() {
    std::process::exit(hsom::cli::main_with_args(std::env::args_os()))
}
