fn main() {
    std::process::exit(eprune::run(std::env::args_os()));
}
