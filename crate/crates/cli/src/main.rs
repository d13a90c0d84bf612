fn main() {
    std::process::exit(lagmin_cli::run(std::env::args_os()));
}
