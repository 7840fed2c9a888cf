//! Service shell around the improvisation engine: WebSocket gateway,
//! content library, configuration and the `improvise` command line.

pub mod cli;
pub mod config;
pub mod content;
pub mod midi_in;
pub mod server;
