use clap::Parser;
use hecke_core::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (code, out) = run(&cli);
    print!("{out}");
    std::process::exit(code);
}
