fn main() {
    std::process::exit(hypotree::cli::run(std::env::args_os()));
}
