fn main() {
    std::process::exit(rtsl_cli::run_command(std::env::args_os()));
}
