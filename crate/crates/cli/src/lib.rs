//! Command-line front end: expression parsing for the coefficient
//! polynomials, subcommand dispatch, and deterministic report output.

pub mod commands;
pub mod expr;
pub mod report;

pub use commands::dispatch;
