use clap::Parser;

use pmmlab::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("pmmlab: {e}");
        std::process::exit(e.exit_code());
    }
}
