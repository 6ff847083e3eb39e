fn main() {
    std::process::exit(okacert_cli::run(std::env::args()));
}
