use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use pamcert_cli::{output, run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, out) = match run(&cli) {
        Ok(done) => done,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Solver { trace, .. } = &e {
                let partial: Vec<f64> = trace.iter().map(|&a| output::round_sig(a)).collect();
                eprintln!("{}", serde_json::json!({ "partial_trace": partial }));
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: cannot write output: {e}");
                    return ExitCode::from(1);
                }
            }
        }
    }
    ExitCode::SUCCESS
}
