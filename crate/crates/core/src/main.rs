fn main() {
    std::process::exit(orlicz_lab::cli::cli_main(std::env::args_os()));
}
