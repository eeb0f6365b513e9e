fn main() {
    std::process::exit(thermocoh::cli::run(std::env::args_os()));
}
