fn main() {
    std::process::exit(ruo::cli::run_from_env());
}
