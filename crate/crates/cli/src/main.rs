fn main() {
    std::process::exit(ccd_cli::run(std::env::args_os()));
}
