fn main() {
    std::process::exit(sparse_lab::cli::run(std::env::args_os()));
}
