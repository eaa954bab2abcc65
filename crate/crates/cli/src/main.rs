use std::io;
use std::process::ExitCode;

use clap::Parser;
use gdasp_cli::{run, run_corpus, Args, CliConfig, EXIT_NO_ANSWERS, EXIT_USAGE};

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match &args.corpus {
        Some(dir) => match run_corpus(dir, args.bless, &mut io::stdout()) {
            Ok(report) if report.passed() => 0,
            Ok(_) => EXIT_NO_ANSWERS,
            Err(e) => {
                eprintln!("error: {}: {}", dir.display(), e);
                EXIT_USAGE
            }
        },
        None => run(&CliConfig::from(&args), &mut io::stdout(), &mut io::stderr()),
    };
    ExitCode::from(code as u8)
}
