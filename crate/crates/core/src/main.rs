fn main() {
    std::process::exit(xizeros::cli::run(std::env::args_os()));
}
