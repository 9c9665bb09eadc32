use clap::Parser;
use kielo_server::cli::{run, Cli};

fn main() -> std::process::ExitCode {
    run(Cli::parse())
}
