fn main() {
    std::process::exit(hypergrowth::cli::cli_main(std::env::args_os()));
}
