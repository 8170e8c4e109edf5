fn main() {
    std::process::exit(ordered_copulas::cli::run(std::env::args_os()));
}
