fn main() {
    let code = fogmatch::cli::run(std::env::args_os(), std::env::var(fogmatch::cli::SEED_ENV).ok(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
