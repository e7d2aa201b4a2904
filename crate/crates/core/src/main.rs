use clap::Parser;
use cylsde::cli::{run, Cli, EXIT_CONFIG};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            // Exit code 2 is reserved for inconclusive reports.
            std::process::exit(if usage { EXIT_CONFIG } else { 0 });
        }
    };
    std::process::exit(run(cli));
}
