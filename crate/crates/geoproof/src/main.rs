use std::process::ExitCode;

use clap::Parser;
use geoproof::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdin = std::io::stdin();
    let code = run(cli, &mut stdin.lock(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}
