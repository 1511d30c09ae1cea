fn main() {
    std::process::exit(symred::cli::run(std::env::args_os()));
}
