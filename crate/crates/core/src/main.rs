fn main() {
    std::process::exit(timeinv::cli::run(std::env::args_os()));
}
