fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(blowup_cli::run(&argv));
}
