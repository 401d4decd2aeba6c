fn main() {
    std::process::exit(govpulse::exec_command(std::env::args_os()));
}
