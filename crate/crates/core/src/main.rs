use clap::Parser;

fn main() {
    let code = ekeland::cli::main_with(ekeland::cli::Cli::parse());
    std::process::exit(code);
}
