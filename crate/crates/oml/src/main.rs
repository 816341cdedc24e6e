fn main() {
    std::process::exit(oml::cli::run());
}
