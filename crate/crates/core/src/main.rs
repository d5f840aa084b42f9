fn main() {
    std::process::exit(tareach::cli::main_with(std::env::args_os()));
}
