fn main() {
    std::process::exit(rmtcap::harness::cli_main(std::env::args_os()));
}
