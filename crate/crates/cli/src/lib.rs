//! Command-line front end: JSON documents in, JSON reports out.

pub mod commands;
pub mod document;
pub mod output;

pub use commands::{run, Cli, Command, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};
pub use document::{parse_document, Document, DocumentError, ParseError};
