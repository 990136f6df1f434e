fn main() {
    std::process::exit(grassmimo::cli::main());
}
