fn main() {
    std::process::exit(cot_lab::cli::run(std::env::args_os()));
}
