fn main() {
    std::process::exit(azuma_lab::cli::run());
}
