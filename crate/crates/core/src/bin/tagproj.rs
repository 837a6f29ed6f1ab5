use clap::Parser;
use tagproj::cli::{execute, Cli};

fn main() {
    std::process::exit(execute(Cli::parse()));
}
