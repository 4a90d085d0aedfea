fn main() {
    std::process::exit(ittm::cli::run());
}
