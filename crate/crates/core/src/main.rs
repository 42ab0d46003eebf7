fn main() {
    std::process::exit(stuckat::harness::cli::run());
}
