fn main() {
    std::process::exit(flowdisc_cli::run(std::env::args_os()));
}
