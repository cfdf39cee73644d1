//! Batch front end: `decompose`, `capacity`, `concurrence`, `sample`,
//! `verify` and `monotone`.

pub mod args;
pub mod commands;
pub mod error;
pub mod matrix_file;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{expand_tolerance_flags, Cli};
use crate::error::EXIT_USAGE;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator,
    I::Item: Into<OsString>,
{
    let cli = match Cli::try_parse_from(expand_tolerance_flags(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(&cli.command) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(outcome.text.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return error::EXIT_CHECK_FAILED;
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("ccd: {e}");
            e.exit_code()
        }
    }
}
