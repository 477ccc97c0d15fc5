fn main() {
    std::process::exit(smoothball::cli::main_with_args(std::env::args_os()));
}
