//! Thin adapter from a raw MIDI byte stream (a device node, FIFO or file) to
//! engine input.

use std::io::Read;
use std::path::PathBuf;
use std::thread::JoinHandle;

use tokio::sync::mpsc;

use improvise_core::midi::{EventKind, MidiEvent, RealtimeDecoder};
use improvise_core::protocol::ClientMessage;

use crate::server::EngineCommand;

/// Note events become note messages; everything else is ignored.
pub fn to_client_message(event: &MidiEvent) -> Option<ClientMessage> {
    match event.kind {
        EventKind::NoteOn { pitch, velocity } => Some(ClientMessage::NoteOn { pitch, velocity }),
        EventKind::NoteOff { pitch, .. } => Some(ClientMessage::NoteOff { pitch }),
        _ => None,
    }
}

pub fn decode(decoder: &mut RealtimeDecoder, bytes: &[u8]) -> Vec<ClientMessage> {
    decoder.feed(bytes).iter().filter_map(to_client_message).collect()
}

/// Reads `path` on a blocking thread until EOF or until the engine goes away.
pub fn spawn_reader(path: PathBuf, commands: mpsc::Sender<EngineCommand>) -> std::io::Result<JoinHandle<()>> {
    let mut source = std::fs::File::open(&path)?;
    Ok(std::thread::spawn(move || {
        let mut decoder = RealtimeDecoder::new();
        let mut buf = [0u8; 256];
        loop {
            let n = match source.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => n,
                Err(e) => {
                    tracing::error!(path = %path.display(), error = %e, "MIDI input failed");
                    break;
                }
            };
            for msg in decode(&mut decoder, &buf[..n]) {
                if commands.blocking_send(EngineCommand::Input(msg)).is_err() {
                    return;
                }
            }
        }
        tracing::info!(path = %path.display(), skipped = decoder.skipped(), "MIDI input closed");
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use improvise_core::theory::Pitch;

    #[test]
    fn running_status_and_clock_bytes() {
        let mut d = RealtimeDecoder::new();
        // note on C4, clock tick, running-status note on E4, velocity-zero release of C4
        let msgs = decode(&mut d, &[0x90, 60, 100, 0xf8, 64, 90, 60, 0]);
        let p = |n| Pitch::new(n).unwrap();
        assert_eq!(
            msgs,
            vec![
                ClientMessage::NoteOn { pitch: p(60), velocity: 100 },
                ClientMessage::NoteOn { pitch: p(64), velocity: 90 },
                ClientMessage::NoteOff { pitch: p(60) },
            ]
        );
    }
}
