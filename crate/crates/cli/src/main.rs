fn main() {
    std::process::exit(qrtebd_cli::run(std::env::args_os()));
}
