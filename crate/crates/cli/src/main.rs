fn main() {
    std::process::exit(harperlab_cli::run(std::env::args_os()));
}
