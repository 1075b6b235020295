use std::process::ExitCode;

use blockrank_cli::run::{report_destination, write_report};
use blockrank_cli::{emit, report_exit_code, run, JobConfig};
use clap::Parser;

fn main() -> ExitCode {
    let job = JobConfig::parse();
    let code = match run(&job) {
        Ok(report) => {
            let text = emit(&report, job.format);
            match report_destination(&job) {
                Some(path) => match write_report(path, &text) {
                    Ok(()) => report_exit_code(&report),
                    Err(e) => {
                        eprintln!("error: {e}");
                        e.exit_code()
                    }
                },
                None => {
                    print!("{text}");
                    report_exit_code(&report)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
