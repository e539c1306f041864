fn main() {
    std::process::exit(ruin_adjust::run(std::env::args_os()));
}
