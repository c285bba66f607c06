//! Orchestration behind the command-line tool: configuration, the converted
//! glyph store and the `convert`, `build`, `bench`, `verify` and `fetch`
//! commands.

mod commands;
mod config;
mod store;

pub use commands::*;
pub use config::RunConfig;
pub use store::{GlyphStore, PackEntry, StoreIndex, StoreWriter, INDEX_FILE, LEDGER_FILE};
