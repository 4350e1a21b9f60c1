use clap::Parser;
use curved_rods::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
