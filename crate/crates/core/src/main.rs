fn main() {
    std::process::exit(linspect::cli::run(std::env::args_os()));
}
