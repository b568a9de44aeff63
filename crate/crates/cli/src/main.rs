fn main() {
    std::process::exit(kptlab_cli::run(std::env::args_os()));
}
