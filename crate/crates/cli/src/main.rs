fn main() {
    std::process::exit(qpadm_cli::run(std::env::args_os()));
}
