fn main() {
    std::process::exit(shapebench::cli::run(std::env::args_os()));
}
