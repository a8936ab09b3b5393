fn main() {
    std::process::exit(fbheat_cli::run(std::env::args_os()));
}
