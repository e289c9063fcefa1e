fn main() {
    std::process::exit(platepatch::cli::run(std::env::args_os()));
}
