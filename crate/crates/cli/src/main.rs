mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use regint_core::Error;

use args::{Cli, Command, Format};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ERROR: u8 = 3;

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::Structure(_) => "structure",
        Error::Domain(_) => "domain",
        Error::Shape { .. } => "shape",
        Error::NormBudget { .. } => "norm_budget",
        Error::CalderonBudget { .. } => "calderon_budget",
        Error::ExtensionBudget { .. } => "extension_budget",
        Error::Refused(_) => "refused",
        Error::Io(_) => "io",
    }
}

/// One JSON object on one line of stderr.
fn report_error(kind: &str, message: &str) {
    let line = serde_json::json!({
        "schema": regint_core::SCHEMA_VERSION,
        "error": kind,
        "message": message.trim(),
    });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            report_error("usage", first.trim_start_matches("error: "));
            return ExitCode::from(EXIT_USAGE);
        }
    };

    if let Command::Extend(a) = &cli.command {
        if a.output.format == Format::Csv {
            report_error("usage", "extend writes json reports only");
            return ExitCode::from(EXIT_USAGE);
        }
    }

    let (result, out) = match &cli.command {
        Command::Norm(a) => (commands::norm(a), a.output.out.as_ref()),
        Command::Interp(a) => (commands::interp(a), a.output.out.as_ref()),
        Command::Extend(a) => (commands::extend(a), a.output.out.as_ref()),
        Command::Hardy(a) => (commands::hardy(a), a.output.out.as_ref()),
        Command::Gen(a) => (commands::gen(a), a.out.as_ref()),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            report_error(error_kind(&e), &e.to_string());
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.text) {
                report_error("io", &format!("{}: {e}", path.display()));
                return ExitCode::from(EXIT_ERROR);
            }
        }
        None => print!("{}", outcome.text),
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
