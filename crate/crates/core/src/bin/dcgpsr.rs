fn main() {
    std::process::exit(dcgpsr::harness::cli_main(std::env::args_os()));
}
