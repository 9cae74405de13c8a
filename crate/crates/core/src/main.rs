fn main() {
    std::process::exit(olsform::cli::run_main());
}
