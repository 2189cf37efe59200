fn main() {
    std::process::exit(clh2d::cli::run());
}
