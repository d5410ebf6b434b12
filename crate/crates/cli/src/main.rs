fn main() {
    std::process::exit(trl_cli::run(std::env::args().collect()));
}
