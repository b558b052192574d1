fn main() {
    std::process::exit(tml::cli::run(std::env::args_os()));
}
