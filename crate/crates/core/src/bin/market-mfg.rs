fn main() {
    std::process::exit(market_mfg::cli::main_with_args(std::env::args_os()));
}
