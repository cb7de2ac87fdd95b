use std::io::Write;
use std::process::ExitCode;

use jetsym::parallel::Execution;
use serde::Serialize;
use serde_json::{json, Value};

use crate::Format;

#[derive(Clone, Debug, Serialize)]
pub struct Config {
    pub seed: u64,
    pub tol: f64,
    pub grid: usize,
    pub execution: Execution,
}

impl Config {
    pub fn new(seed: u64, tol: f64, grid: usize, sequential: bool) -> Self {
        Config {
            seed,
            tol,
            grid,
            execution: if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
        }
    }
}

/// One run: the JSON document and its text rendering.
pub struct Outcome {
    pub command: &'static str,
    pub config: Config,
    pub inputs: Value,
    pub report: Value,
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    pub fn emit(self, format: Format) -> ExitCode {
        let mut out = std::io::stdout().lock();
        // a closed pipe is not an error of the run
        let _ = match format {
            Format::Json => {
                let doc = json!({
                    "command": self.command,
                    "config": self.config,
                    "inputs": self.inputs,
                    "report": self.report,
                    "passed": self.passed,
                });
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&doc).expect("report serializes")
                )
            }
            Format::Text => write!(out, "{}", self.text)
                .and_then(|_| writeln!(out, "{}", if self.passed { "PASS" } else { "FAIL" })),
        };
        ExitCode::from(if self.passed { 0 } else { 1 })
    }
}

/// Usage or input error: exit status 2.
#[derive(Debug)]
pub struct Failure(pub String);

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure(msg.into())
    }

    pub fn emit(self) -> ExitCode {
        eprintln!("error: {}", self.0);
        ExitCode::from(2)
    }
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}
