fn main() {
    let code = synccorr::cli::run(std::env::args_os());
    std::process::exit(code);
}
