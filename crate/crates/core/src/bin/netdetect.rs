fn main() {
    std::process::exit(netdetect::cli::run(std::env::args_os()));
}
