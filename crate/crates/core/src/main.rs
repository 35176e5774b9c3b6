fn main() {
    std::process::exit(ginzburg::cli::run(std::env::args_os()));
}
