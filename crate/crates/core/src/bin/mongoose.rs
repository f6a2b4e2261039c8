fn main() {
    std::process::exit(mongoose::cli::run_command(std::env::args_os()));
}
