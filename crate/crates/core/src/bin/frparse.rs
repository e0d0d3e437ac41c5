fn main() {
    std::process::exit(frparse::cli::run(std::env::args_os()));
}
