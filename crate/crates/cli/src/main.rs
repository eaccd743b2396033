mod args;
mod job;
mod render;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use dyadint_core::expr::ExprError;
use dyadint_core::geometry::GeometryError;
use dyadint_core::Error;
use serde_json::json;

use args::{Cli, Output};
use job::{Failure, JobSpec, SCHEMA};

const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(&cli))
}

fn run(cli: &Cli) -> u8 {
    if let Some(n) = cli.threads {
        let pool = if n == 0 {
            Err("--threads must be at least 1".to_string())
        } else {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
        };
        if let Err(message) = pool {
            return report_failure(cli, "usage", &message, None, EXIT_USAGE);
        }
    }
    let job = match JobSpec::from_command(&cli.command) {
        Ok(job) => job,
        Err(Failure::Usage(u)) => return report_failure(cli, "usage", &u.0, None, EXIT_USAGE),
        Err(Failure::Run(e)) => return report_error(cli, &e),
    };
    match job.run() {
        Ok(report) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            if render::write(&mut out, cli.output, &report).and_then(|_| out.flush()).is_err() {
                return EXIT_ERROR;
            }
            report.exit
        }
        Err(e) => report_error(cli, &e),
    }
}

/// Error class and exit status: malformed text is a usage error.
fn classify(e: &Error) -> (&'static str, u8) {
    match e.root() {
        Error::Expr(ExprError::Syntax { .. }) | Error::Geometry(GeometryError::BoxSyntax { .. }) => {
            ("syntax", EXIT_USAGE)
        }
        Error::Expr(ExprError::Dimension { .. }) | Error::Geometry(GeometryError::Dimension { .. }) => {
            ("dimension", EXIT_ERROR)
        }
        Error::Expr(ExprError::Domain { .. }) => ("domain", EXIT_ERROR),
        Error::Expr(ExprError::Arity { .. }) => ("arity", EXIT_ERROR),
        Error::Geometry(_) => ("geometry", EXIT_ERROR),
        Error::Precondition(_) => ("precondition", EXIT_ERROR),
        Error::Inconsistent { .. } => ("inconsistent", EXIT_ERROR),
        _ => ("invalid", EXIT_ERROR),
    }
}

fn report_error(cli: &Cli, e: &Error) -> u8 {
    let (kind, code) = classify(e);
    let cube = match e {
        Error::AtCube { cube, .. } => Some(cube.as_str()),
        _ => None,
    };
    report_failure(cli, kind, &e.to_string(), cube, code)
}

fn report_failure(cli: &Cli, kind: &str, message: &str, cube: Option<&str>, code: u8) -> u8 {
    let stderr = io::stderr();
    let mut err = stderr.lock();
    let _ = if cli.output == Output::Json {
        let mut error = json!({ "kind": kind, "message": message });
        if let Some(c) = cube {
            error["cube"] = json!(c);
        }
        writeln!(err, "{}", json!({ "schema": SCHEMA, "error": error }))
    } else {
        writeln!(err, "dyadint: {kind} error: {message}")
    };
    code
}
