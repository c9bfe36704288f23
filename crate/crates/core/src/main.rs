use clap::Parser;

fn main() {
    let code = fraclim::cli::run(fraclim::cli::Cli::parse());
    std::process::exit(code);
}
