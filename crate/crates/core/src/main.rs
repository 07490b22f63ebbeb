fn main() {
    std::process::exit(chanent::cli::run(std::env::args_os()));
}
