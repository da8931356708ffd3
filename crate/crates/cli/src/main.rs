use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use kdqlab_cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let result = run(Cli::parse());
    let code = exit_code(&result);
    match &result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            let mut out = std::io::stdout().lock();
            if out.write_all(outcome.text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(1);
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(code)
}
