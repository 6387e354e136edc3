use clap::Parser;
use noonspec::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
