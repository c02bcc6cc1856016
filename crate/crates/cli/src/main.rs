use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sato_tate_cli::{run_job, CliError, JobSpec};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let spec = match JobSpec::try_parse() {
        Ok(s) => s,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Validation(e.to_string())),
    };
    match run_job(&spec) {
        Ok(bytes) => {
            if spec.out.is_none() {
                let mut out = std::io::stdout().lock();
                if out.write_all(&bytes).and_then(|_| out.flush()).is_err() {
                    return ExitCode::from(3);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}
