fn main() {
    std::process::exit(menugap::cli::run(std::env::args_os()));
}
