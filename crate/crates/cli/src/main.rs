fn main() {
    std::process::exit(kdvinv_cli::main_with(std::env::args_os()));
}
