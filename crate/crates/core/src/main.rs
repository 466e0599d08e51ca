fn main() {
    std::process::exit(mfjump::cli::run(std::env::args_os()));
}
