fn main() {
    std::process::exit(recurstat::cli::run(std::env::args_os()));
}
