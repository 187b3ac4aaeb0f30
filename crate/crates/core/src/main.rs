fn main() {
    let code = okpf::cli_io::cli::execute(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
