fn main() {
    std::process::exit(ddc::cli::run(std::env::args_os()));
}
