//! JSON messages exchanged with clients, one message per WebSocket frame.

use serde::{Deserialize, Serialize};

use crate::clock::MetronomeClick;
use crate::curriculum::{ContentId, LessonSpec, SessionReport};
use crate::midi::MidiEvent;
use crate::modes::{HighlightFrame, LessonMode, PressClass};
use crate::theory::Pitch;

fn default_velocity() -> u8 {
    80
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    NoteOn {
        pitch: Pitch,
        #[serde(default = "default_velocity")]
        velocity: u8,
    },
    NoteOff {
        pitch: Pitch,
    },
    SetMode {
        mode: LessonMode,
    },
    ToggleApproaches,
    SetTempo {
        bpm: f64,
    },
    SetSwing {
        ratio: f64,
    },
    SelectLesson {
        id: u32,
        #[serde(default)]
        exercise: usize,
    },
    Start,
    Stop,
    LoadContent {
        id: ContentId,
    },
}

impl ClientMessage {
    pub fn parse(text: &str) -> Result<Self, String> {
        let msg: ClientMessage = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if let ClientMessage::NoteOn { velocity, .. } = msg {
            if velocity > 127 {
                return Err(format!("velocity {velocity} out of range 0..=127"));
            }
        }
        Ok(msg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("client messages always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LessonSummary {
    pub id: u32,
    pub title: String,
    pub objective: String,
    pub tools: Vec<String>,
    pub exercises: usize,
}

impl From<&LessonSpec> for LessonSummary {
    fn from(l: &LessonSpec) -> Self {
        LessonSummary {
            id: l.id,
            title: l.title.clone(),
            objective: l.objective.clone(),
            tools: l.tools.clone(),
            exercises: l.exercises.len(),
        }
    }
}

/// One entry of the content library manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentEntry {
    pub id: ContentId,
    pub path: String,
    pub title: String,
    #[serde(default)]
    pub lesson_tags: Vec<u32>,
    pub ppq: u16,
    pub duration_ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Frame(HighlightFrame),
    PressClass {
        pitch: Pitch,
        class: PressClass,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        timing_error_ms: Option<f64>,
    },
    Report(SessionReport),
    LessonList {
        lessons: Vec<LessonSummary>,
    },
    ContentList {
        entries: Vec<ContentEntry>,
    },
    AccompanimentEvent {
        event: MidiEvent,
    },
    MetronomeEvent(MetronomeClick),
    Error {
        message: String,
    },
}

impl ServerMessage {
    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error { message: message.into() }
    }

    pub fn is_frame(&self) -> bool {
        matches!(self, ServerMessage::Frame(_))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn note_on_from_json() {
        let m = ClientMessage::parse(r#"{"type":"note_on","pitch":60,"velocity":80}"#).unwrap();
        assert_eq!(m, ClientMessage::NoteOn { pitch: Pitch::new(60).unwrap(), velocity: 80 });
        let m = ClientMessage::parse(r#"{"type":"toggle_approaches"}"#).unwrap();
        assert_eq!(m, ClientMessage::ToggleApproaches);
        let m = ClientMessage::parse(r#"{"type":"select_lesson","id":1}"#).unwrap();
        assert_eq!(m, ClientMessage::SelectLesson { id: 1, exercise: 0 });
    }

    #[test]
    fn malformed_messages_are_rejected() {
        for bad in [
            r#"{"type":"note_on"}"#,
            r#"{"type":"note_on","pitch":128}"#,
            r#"{"type":"note_on","pitch":60,"velocity":200}"#,
            r#"{"type":"dance"}"#,
            r#"{"type":"set_mode","mode":"karaoke"}"#,
            r#"not json"#,
            r#"{"pitch":60}"#,
        ] {
            assert!(ClientMessage::parse(bad).is_err(), "{bad} should be rejected");
        }
    }

    #[test]
    fn frame_message_carries_frame_tick() {
        let json = ServerMessage::Frame(HighlightFrame::blank(42)).to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["type"], "frame");
        assert_eq!(v["frame_tick"], 42);
        assert_eq!(v["key_colors"].as_array().unwrap().len(), 88);
    }

    #[test]
    fn metronome_message_shape() {
        let json = ServerMessage::MetronomeEvent(MetronomeClick { tick: 480, accent: false }).to_json();
        assert_eq!(json, r#"{"type":"metronome_event","tick":480,"accent":false}"#);
    }
}
