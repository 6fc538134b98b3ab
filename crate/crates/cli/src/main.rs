fn main() {
    std::process::exit(nsys_cli::run(std::env::args_os()));
}
