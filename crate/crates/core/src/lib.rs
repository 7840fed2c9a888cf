//! Theory, MIDI, recognition, timing and highlight logic for a keyboard
//! improvisation tutor.
//!
//! Everything here is pure and deterministic. The [`engine::Engine`] drives a
//! session from client messages and a virtual clock; the gateway crate wraps
//! it in a WebSocket server.

pub mod clock;
pub mod curriculum;
pub mod engine;
pub mod midi;
pub mod modes;
pub mod protocol;
pub mod recognition;
pub mod theory;
