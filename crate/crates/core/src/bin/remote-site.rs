fn main() {
    std::process::exit(remote_site::cli::main_with_args(std::env::args_os()));
}
