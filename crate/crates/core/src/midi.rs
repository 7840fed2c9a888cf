//! Standard MIDI File reading/writing and a live byte-stream decoder.
//!
//! Only metrical (PPQ) time division and formats 0 and 1 are accepted.
//! Unknown meta, sysex and channel messages survive a round trip as
//! [`RawEvent`]s.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::theory::Pitch;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmfError {
    #[error("not a standard MIDI file")]
    NotSmf,
    #[error("unexpected end of data")]
    Truncated,
    #[error("variable-length quantity longer than 4 bytes")]
    MalformedVlq,
    #[error("value {0} does not fit a 4-byte variable-length quantity")]
    VlqRange(u64),
    #[error("SMPTE time division is not supported")]
    UnsupportedTimeDivision,
    #[error("SMF format {0} is not supported")]
    UnsupportedFormat(u16),
    #[error("malformed MIDI data: {0}")]
    Malformed(String),
}

pub const VLQ_MAX: u32 = 0x0FFF_FFFF;
pub const DEFAULT_TEMPO_US_PER_QUARTER: u32 = 500_000;

/// Decodes one variable-length quantity; returns `(value, bytes consumed)`.
pub fn decode_vlq(bytes: &[u8]) -> Result<(u32, usize), SmfError> {
    if bytes.is_empty() {
        return Err(SmfError::Truncated);
    }
    let mut value = 0u32;
    for (i, &b) in bytes.iter().enumerate() {
        if i == 4 {
            return Err(SmfError::MalformedVlq);
        }
        value = (value << 7) | (b & 0x7f) as u32;
        if b & 0x80 == 0 {
            return Ok((value, i + 1));
        }
    }
    if bytes.len() >= 4 {
        Err(SmfError::MalformedVlq)
    } else {
        Err(SmfError::Truncated)
    }
}

pub fn encode_vlq(value: u64) -> Result<Vec<u8>, SmfError> {
    if value > VLQ_MAX as u64 {
        return Err(SmfError::VlqRange(value));
    }
    let mut out = vec![(value & 0x7f) as u8];
    let mut rest = value >> 7;
    while rest > 0 {
        out.push(0x80 | (rest & 0x7f) as u8);
        rest >>= 7;
    }
    out.reverse();
    Ok(out)
}

/// Messages without a dedicated variant, kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "raw", rename_all = "snake_case")]
pub enum RawEvent {
    Meta { meta_type: u8, data: Vec<u8> },
    /// `status` is 0xF0 or 0xF7; `data` excludes the length prefix.
    SysEx { status: u8, data: Vec<u8> },
    /// Any other channel voice message (aftertouch, pitch bend, ...).
    Channel { status: u8, data: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    NoteOn { pitch: Pitch, velocity: u8 },
    NoteOff { pitch: Pitch, velocity: u8 },
    ControlChange { controller: u8, value: u8 },
    ProgramChange { program: u8 },
    MetaTempo { us_per_quarter: u32 },
    MetaEnd,
    Other(RawEvent),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MidiEvent {
    pub tick: u64,
    pub channel: u8,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl MidiEvent {
    pub fn note_on(tick: u64, channel: u8, pitch: Pitch, velocity: u8) -> Self {
        let kind = if velocity == 0 {
            EventKind::NoteOff { pitch, velocity: 0 }
        } else {
            EventKind::NoteOn { pitch, velocity: velocity & 0x7f }
        };
        MidiEvent { tick, channel: channel & 0x0f, kind }
    }

    pub fn note_off(tick: u64, channel: u8, pitch: Pitch) -> Self {
        MidiEvent { tick, channel: channel & 0x0f, kind: EventKind::NoteOff { pitch, velocity: 0 } }
    }

    pub fn end(tick: u64) -> Self {
        MidiEvent { tick, channel: 0, kind: EventKind::MetaEnd }
    }

    pub fn pitch(&self) -> Option<Pitch> {
        match self.kind {
            EventKind::NoteOn { pitch, .. } | EventKind::NoteOff { pitch, .. } => Some(pitch),
            _ => None,
        }
    }

    pub fn velocity(&self) -> Option<u8> {
        match self.kind {
            EventKind::NoteOn { velocity, .. } | EventKind::NoteOff { velocity, .. } => Some(velocity),
            _ => None,
        }
    }

    pub fn is_note_on(&self) -> bool {
        matches!(self.kind, EventKind::NoteOn { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MidiTrack {
    pub events: Vec<MidiEvent>,
}

impl MidiTrack {
    pub fn last_tick(&self) -> u64 {
        self.events.last().map_or(0, |e| e.tick)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MidiFile {
    pub format: u16,
    pub ppq: u16,
    pub tracks: Vec<MidiTrack>,
}

impl MidiFile {
    /// Latest tick across all tracks.
    pub fn duration_ticks(&self) -> u64 {
        self.tracks.iter().map(MidiTrack::last_tick).max().unwrap_or(0)
    }

    /// First tempo meta event, or 120 BPM.
    pub fn initial_tempo_bpm(&self) -> f64 {
        self.tracks
            .iter()
            .flat_map(|t| &t.events)
            .filter_map(|e| match e.kind {
                EventKind::MetaTempo { us_per_quarter } if us_per_quarter > 0 => Some((e.tick, us_per_quarter)),
                _ => None,
            })
            .min_by_key(|&(tick, _)| tick)
            .map_or(120.0, |(_, us)| 60_000_000.0 / us as f64)
    }

    /// Note on/off events of every track merged in tick order (stable per track).
    pub fn note_events(&self) -> Vec<MidiEvent> {
        let mut all: Vec<MidiEvent> = self
            .tracks
            .iter()
            .flat_map(|t| t.events.iter().filter(|e| e.pitch().is_some()).cloned())
            .collect();
        all.sort_by_key(|e| e.tick);
        all
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SmfError> {
        let end = self.pos.checked_add(n).ok_or(SmfError::Truncated)?;
        let slice = self.bytes.get(self.pos..end).ok_or(SmfError::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, SmfError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, SmfError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn vlq(&mut self) -> Result<u32, SmfError> {
        let (v, n) = decode_vlq(&self.bytes[self.pos..])?;
        self.pos += n;
        Ok(v)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }
}

pub fn parse_smf(bytes: &[u8]) -> Result<MidiFile, SmfError> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() < 4 || &bytes[..4] != b"MThd" {
        return Err(SmfError::NotSmf);
    }
    r.pos = 4;
    let header_len = r.u32()? as usize;
    if header_len < 6 {
        return Err(SmfError::Malformed(format!("header length {header_len}")));
    }
    let header = r.take(header_len)?;
    let format = u16::from_be_bytes([header[0], header[1]]);
    let ntracks = u16::from_be_bytes([header[2], header[3]]);
    let division = u16::from_be_bytes([header[4], header[5]]);
    if format > 1 {
        return Err(SmfError::UnsupportedFormat(format));
    }
    if division & 0x8000 != 0 {
        return Err(SmfError::UnsupportedTimeDivision);
    }
    if division == 0 {
        return Err(SmfError::Malformed("ppq of zero".into()));
    }
    if format == 0 && ntracks != 1 {
        return Err(SmfError::Malformed(format!("format 0 with {ntracks} tracks")));
    }

    let mut tracks = Vec::with_capacity(ntracks as usize);
    while tracks.len() < ntracks as usize {
        let tag = r.take(4)?;
        let len = r.u32()? as usize;
        let body = r.take(len)?;
        if tag == b"MTrk" {
            tracks.push(parse_track(body)?);
        }
        // other chunk types are skipped
    }
    Ok(MidiFile { format, ppq: division, tracks })
}

fn data_len(status: u8) -> usize {
    match status & 0xf0 {
        0xc0 | 0xd0 => 1,
        _ => 2,
    }
}

fn parse_track(body: &[u8]) -> Result<MidiTrack, SmfError> {
    let mut r = Reader { bytes: body, pos: 0 };
    let mut events = Vec::new();
    let mut tick = 0u64;
    let mut running: Option<u8> = None;
    while !r.at_end() {
        tick += r.vlq()? as u64;
        let first = r.u8()?;
        let event = match first {
            0xff => {
                running = None;
                let meta_type = r.u8()?;
                let len = r.vlq()? as usize;
                let data = r.take(len)?;
                match meta_type {
                    0x2f => MidiEvent::end(tick),
                    0x51 if len == 3 => MidiEvent {
                        tick,
                        channel: 0,
                        kind: EventKind::MetaTempo {
                            us_per_quarter: u32::from_be_bytes([0, data[0], data[1], data[2]]),
                        },
                    },
                    _ => MidiEvent {
                        tick,
                        channel: 0,
                        kind: EventKind::Other(RawEvent::Meta { meta_type, data: data.to_vec() }),
                    },
                }
            }
            0xf0 | 0xf7 => {
                running = None;
                let len = r.vlq()? as usize;
                let data = r.take(len)?.to_vec();
                MidiEvent { tick, channel: 0, kind: EventKind::Other(RawEvent::SysEx { status: first, data }) }
            }
            0xf1..=0xfe => {
                return Err(SmfError::Malformed(format!("status 0x{first:02x} inside a track")));
            }
            _ => {
                let (status, d0) = if first & 0x80 != 0 {
                    running = Some(first);
                    (first, r.u8()?)
                } else {
                    let status =
                        running.ok_or_else(|| SmfError::Malformed("data byte without running status".into()))?;
                    (status, first)
                };
                let d1 = if data_len(status) == 2 { Some(r.u8()?) } else { None };
                channel_event(tick, status, d0, d1)?
            }
        };
        let done = event.kind == EventKind::MetaEnd;
        events.push(event);
        if done {
            break;
        }
    }
    if events.last().map(|e| &e.kind) != Some(&EventKind::MetaEnd) {
        events.push(MidiEvent::end(tick));
    }
    Ok(MidiTrack { events })
}

fn channel_event(tick: u64, status: u8, d0: u8, d1: Option<u8>) -> Result<MidiEvent, SmfError> {
    if d0 & 0x80 != 0 || d1.is_some_and(|b| b & 0x80 != 0) {
        return Err(SmfError::Malformed(format!("data byte with high bit after status 0x{status:02x}")));
    }
    let channel = status & 0x0f;
    let pitch = || Pitch::new(d0 as i32).expect("7-bit value");
    let kind = match (status & 0xf0, d1) {
        (0x90, Some(0)) => EventKind::NoteOff { pitch: pitch(), velocity: 0 },
        (0x90, Some(v)) => EventKind::NoteOn { pitch: pitch(), velocity: v },
        (0x80, Some(v)) => EventKind::NoteOff { pitch: pitch(), velocity: v },
        (0xb0, Some(v)) => EventKind::ControlChange { controller: d0, value: v },
        (0xc0, None) => EventKind::ProgramChange { program: d0 },
        (_, d1) => {
            let mut data = vec![d0];
            data.extend(d1);
            EventKind::Other(RawEvent::Channel { status, data })
        }
    };
    Ok(MidiEvent { tick, channel, kind })
}

pub fn serialize_smf(file: &MidiFile) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&file.format.to_be_bytes());
    out.extend_from_slice(&(file.tracks.len() as u16).to_be_bytes());
    out.extend_from_slice(&(file.ppq & 0x7fff).to_be_bytes());
    for track in &file.tracks {
        let body = serialize_track(track);
        out.extend_from_slice(b"MTrk");
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
    }
    out
}

fn push_vlq(out: &mut Vec<u8>, value: u64) {
    // Deltas beyond the VLQ range cannot come from a parsed file; clamp rather than panic.
    out.extend(encode_vlq(value.min(VLQ_MAX as u64)).expect("clamped"));
}

fn serialize_track(track: &MidiTrack) -> Vec<u8> {
    let mut out = Vec::new();
    let mut last = 0u64;
    let mut ended = false;
    for e in &track.events {
        if ended {
            break;
        }
        push_vlq(&mut out, e.tick.saturating_sub(last));
        last = last.max(e.tick);
        let ch = e.channel & 0x0f;
        match &e.kind {
            EventKind::NoteOn { pitch, velocity } => out.extend([0x90 | ch, pitch.number(), velocity & 0x7f]),
            EventKind::NoteOff { pitch, velocity } => out.extend([0x80 | ch, pitch.number(), velocity & 0x7f]),
            EventKind::ControlChange { controller, value } => out.extend([0xb0 | ch, controller & 0x7f, value & 0x7f]),
            EventKind::ProgramChange { program } => out.extend([0xc0 | ch, program & 0x7f]),
            EventKind::MetaTempo { us_per_quarter } => {
                let b = us_per_quarter.to_be_bytes();
                out.extend([0xff, 0x51, 0x03, b[1], b[2], b[3]]);
            }
            EventKind::MetaEnd => {
                out.extend([0xff, 0x2f, 0x00]);
                ended = true;
            }
            EventKind::Other(RawEvent::Meta { meta_type, data }) => {
                out.extend([0xff, *meta_type]);
                push_vlq(&mut out, data.len() as u64);
                out.extend_from_slice(data);
            }
            EventKind::Other(RawEvent::SysEx { status, data }) => {
                out.push(*status);
                push_vlq(&mut out, data.len() as u64);
                out.extend_from_slice(data);
            }
            EventKind::Other(RawEvent::Channel { status, data }) => {
                out.push(*status);
                out.extend(data.iter().map(|b| b & 0x7f));
            }
        }
    }
    if !ended {
        push_vlq(&mut out, 0);
        out.extend([0xff, 0x2f, 0x00]);
    }
    out
}

/// Incremental decoder for a live MIDI 1.0 byte stream.
///
/// One instance per input port. Events are emitted with `tick = 0`; the
/// caller stamps them.
#[derive(Debug, Default, Clone)]
pub struct RealtimeDecoder {
    running: Option<u8>,
    data: [u8; 2],
    filled: usize,
    in_sysex: bool,
    skip_data: usize,
    skipped: u64,
}

impl RealtimeDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bytes that were discarded: unknown statuses, stray data, system common.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn push(&mut self, byte: u8) -> Option<MidiEvent> {
        if byte >= 0xf8 {
            // system realtime: interleaves anywhere, never touches assembly state
            return None;
        }
        if byte & 0x80 != 0 {
            self.filled = 0;
            self.skip_data = 0;
            if self.in_sysex {
                self.in_sysex = false;
                if byte == 0xf7 {
                    return None;
                }
            }
            match byte {
                0x80..=0xef => self.running = Some(byte),
                0xf0 => {
                    self.running = None;
                    self.in_sysex = true;
                }
                0xf1 | 0xf3 => {
                    self.running = None;
                    self.skip_data = 1;
                    self.skipped += 1;
                }
                0xf2 => {
                    self.running = None;
                    self.skip_data = 2;
                    self.skipped += 1;
                }
                _ => {
                    self.running = None;
                    self.skipped += 1;
                }
            }
            return None;
        }
        if self.in_sysex {
            return None;
        }
        if self.skip_data > 0 {
            self.skip_data -= 1;
            return None;
        }
        let Some(status) = self.running else {
            self.skipped += 1;
            return None;
        };
        self.data[self.filled] = byte;
        self.filled += 1;
        if self.filled < data_len(status) {
            return None;
        }
        self.filled = 0;
        let d1 = (data_len(status) == 2).then_some(self.data[1]);
        channel_event(0, status, self.data[0], d1).ok()
    }

    pub fn feed(&mut self, bytes: &[u8]) -> Vec<MidiEvent> {
        bytes.iter().filter_map(|&b| self.push(b)).collect()
    }
}
