fn main() {
    let code = maass_lab_cli::app::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
