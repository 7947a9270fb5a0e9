use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Run a whitham-gt verification job.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// JSON job configuration.
    #[arg(long, required_unless_present = "list_structures")]
    config: Option<PathBuf>,
    /// Report path; the text summary goes next to it with a .txt extension.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the builtin structures and exit.
    #[arg(long)]
    list_structures: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { whitham_gt_cli::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    if args.list_structures {
        print!("{}", whitham_gt_cli::list_structures());
        return ExitCode::SUCCESS;
    }
    let config = args.config.expect("required by clap");
    ExitCode::from(whitham_gt_cli::run_cli(&config, args.out.as_deref(), args.seed) as u8)
}
