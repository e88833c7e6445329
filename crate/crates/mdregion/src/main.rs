fn main() {
    std::process::exit(mdregion::cli::run());
}
