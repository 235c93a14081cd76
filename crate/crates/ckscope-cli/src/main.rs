fn main() {
    std::process::exit(ckscope_cli::run(std::env::args().skip(1)));
}
