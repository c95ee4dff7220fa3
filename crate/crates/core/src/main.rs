fn main() {
    std::process::exit(genrisk::cli::run(std::env::args_os()));
}
