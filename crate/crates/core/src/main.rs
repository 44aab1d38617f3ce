fn main() {
    std::process::exit(gradedmu::cli::main());
}
