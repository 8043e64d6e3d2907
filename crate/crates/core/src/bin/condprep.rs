fn main() {
    std::process::exit(condprep::cli::run(std::env::args_os()));
}
