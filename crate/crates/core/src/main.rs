fn main() {
    std::process::exit(extremal_rmt::cli::main());
}
