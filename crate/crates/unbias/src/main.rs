fn main() {
    std::process::exit(unbias::cli::run());
}
