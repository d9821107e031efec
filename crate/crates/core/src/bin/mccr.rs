fn main() {
    env_logger::init();
    std::process::exit(mccr::cli::main_with_args(std::env::args_os()));
}
