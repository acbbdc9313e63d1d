fn main() {
    std::process::exit(minkkit::cli::run(std::env::args_os()));
}
