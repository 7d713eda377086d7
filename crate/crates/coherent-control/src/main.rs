fn main() {
    std::process::exit(coherent_control::cli::run());
}
