fn main() {
    std::process::exit(poisekit::cli::run(std::env::args_os()));
}
