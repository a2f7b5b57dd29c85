fn main() {
    std::process::exit(conjmax::cli::run(std::env::args_os()));
}
