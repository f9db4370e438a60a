use std::io::Write;
use std::process::ExitCode;

use geophase::cli::{parse_args, run};

fn main() -> ExitCode {
    let cli = match parse_args(std::env::args().collect()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap exits with 2 on usage errors and 0 for --help/--version
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if cli.output.is_none() {
                let mut out = std::io::stdout().lock();
                if out.write_all(outcome.text.as_bytes()).is_err() {
                    return ExitCode::from(1);
                }
            }
            if outcome.failed {
                eprintln!("geophase: one or more checks failed");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("geophase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
