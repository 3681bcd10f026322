fn main() {
    std::process::exit(l3ppi_cli::run(std::env::args_os()));
}
