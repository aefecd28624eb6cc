fn main() {
    std::process::exit(hitpredict_cli::run(std::env::args_os()));
}
