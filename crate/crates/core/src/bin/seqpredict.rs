fn main() {
    std::process::exit(seqpredict::cli::main());
}
