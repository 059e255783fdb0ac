fn main() {
    std::process::exit(optri::cli::main_with_args(std::env::args()));
}
