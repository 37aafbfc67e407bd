fn main() {
    std::process::exit(halfwave_core::cli::run(std::env::args_os()));
}
