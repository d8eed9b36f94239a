fn main() {
    std::process::exit(ptnn::cli::main_with_args(std::env::args_os()));
}
