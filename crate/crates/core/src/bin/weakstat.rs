fn main() {
    std::process::exit(weakstat::cli::run(std::env::args_os()));
}
