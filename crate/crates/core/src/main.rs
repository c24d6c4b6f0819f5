fn main() {
    std::process::exit(pel::cli::main());
}
