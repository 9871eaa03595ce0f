fn main() {
    std::process::exit(calsched_cli::cli(std::env::args_os()));
}
