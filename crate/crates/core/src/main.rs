fn main() {
    std::process::exit(growthlab::cli::cli_main(std::env::args_os()));
}
