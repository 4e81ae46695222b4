fn main() {
    std::process::exit(bo_spectral::cli::main());
}
