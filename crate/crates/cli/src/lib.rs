//! Command-line front end for `ruin-adjust-core`: file formats, JSON
//! reports, configuration files and parallel Monte Carlo drivers.
//!
//! Exit statuses: 0 success, 2 usage or validation error, 3 existence or
//! estimation failure, 4 input/output error.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod report;
pub mod study;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{Cli, Command, DEFAULT_SEED};
pub use error::CliError;

/// Parse `args` (including the program name), run the command and return
/// the process exit status. Errors are printed to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                error::EXIT_USAGE
            } else {
                error::EXIT_OK
            };
        }
    };
    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
