fn main() {
    std::process::exit(qprop::cli::run(std::env::args_os()));
}
