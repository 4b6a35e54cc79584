fn main() {
    std::process::exit(frameforge::cli_reports::main_from_env());
}
