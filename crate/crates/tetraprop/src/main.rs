fn main() {
    std::process::exit(tetraprop::cli::run_from_env());
}
