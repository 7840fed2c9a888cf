//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Everything crosses the boundary as JSON strings or plain numbers so the
//! page needs no generated TypeScript types.

use wasm_bindgen::prelude::*;

use improvise_core::clock::{apply_swing, SwingProfile, Subdivision};
use improvise_core::modes::{guided_press_frame, ModeConfig};
use improvise_core::recognition::{recognize_chord, HeldNotes};
use improvise_core::theory::{realize_progression, Key, Pitch, Progression};

const PPQ: u32 = 480;

/// Highlight frame JSON for chord `index` of a preset progression
/// (`two_five_one`, `two_five_one_six`, `minor_two_five_one`, `dorian_vamp`).
/// The index wraps around the progression.
#[wasm_bindgen]
pub fn guided_frame(key: &str, progression: &str, index: usize, approaches: bool) -> Result<String, String> {
    let key = Key::parse(key).map_err(|e| e.to_string())?;
    let prog = Progression::preset(progression).ok_or_else(|| format!("unknown progression {progression:?}"))?;
    let realized = realize_progression(&prog, key, PPQ).map_err(|e| e.to_string())?;
    let cfg = ModeConfig { approaches_on: approaches, ..ModeConfig::default() };
    let frame = guided_press_frame(&realized, index % realized.len(), key, &cfg);
    serde_json::to_string(&frame).map_err(|e| e.to_string())
}

/// Chord symbol for the held MIDI note numbers, e.g. `"G7"`.
#[wasm_bindgen]
pub fn recognize(pitches: &[u8]) -> Option<String> {
    let held = HeldNotes::from_pitches(pitches.iter().filter_map(|&n| Pitch::new(n as i32).ok()));
    recognize_chord(&held).map(|c| c.to_string())
}

/// Swung position of every `step`-th straight tick across one beat.
#[wasm_bindgen]
pub fn swing_curve(ratio: f64, ppq: u32, step: u32) -> Result<Vec<u32>, String> {
    if ppq == 0 || step == 0 {
        return Err("ppq and step must be positive".into());
    }
    let profile = SwingProfile::new(ratio, Subdivision::Eighth).map_err(|e| e.to_string())?;
    Ok((0..=ppq).step_by(step as usize).map(|t| apply_swing(&profile, t as u64, ppq) as u32).collect())
}
