fn main() {
    std::process::exit(bubble_tower::cli::main_with_args(std::env::args_os()));
}
