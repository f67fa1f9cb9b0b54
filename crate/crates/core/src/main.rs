fn main() {
    std::process::exit(torus_bubbles::cli::run(std::env::args_os()));
}
