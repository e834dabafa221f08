fn main() {
    std::process::exit(stylerank::cli::main());
}
