fn main() {
    std::process::exit(furrow::cli::run(std::env::args_os()));
}
