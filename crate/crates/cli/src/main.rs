use clap::Parser;
use crnalg_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let outcome = run(&cli);
    print!("{}", outcome.output(cli.json));
    if let Some(err) = outcome.report.result.get("error") {
        eprintln!("error: {}", err["message"].as_str().unwrap_or("unknown"));
    }
    std::process::exit(outcome.exit_code);
}
