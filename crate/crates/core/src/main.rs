fn main() {
    std::process::exit(switchopt::cli::run(std::env::args_os()));
}
