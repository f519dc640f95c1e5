fn main() {
    std::process::exit(thz_srlnc::cli::main());
}
