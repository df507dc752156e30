fn main() {
    std::process::exit(pptdiscrim::cli::main());
}
