//! Library side of the `fgsim` command-line tool: circuit file schema,
//! subcommand implementations and JSON output.

pub mod commands;
pub mod error;
pub mod output;
pub mod schema;
