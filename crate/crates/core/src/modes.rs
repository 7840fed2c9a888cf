//! The four highlight modes as pure frame builders.
//!
//! Keys below `split_pitch` carry progression guidance (yellow); keys at or
//! above it carry improvisation guidance (pink chord tones, purple approaches).

use serde::{Deserialize, Serialize};

use crate::clock::Transport;
use crate::midi::{EventKind, MidiEvent};
use crate::recognition::{recognize_chord, HeldNotes};
use crate::theory::{
    chord_scale, chord_tones, half_step_approaches_from, scale_above_approaches, Chord, HalfStepDirection, Key, Pitch,
    PitchClassSet, TimedChord,
};

pub const LOWEST_KEY: u8 = 21;
pub const HIGHEST_KEY: u8 = 108;
pub const KEY_COUNT: usize = 88;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyColor {
    #[default]
    Off,
    ProgressionYellow,
    ChordTonePink,
    ApproachPurple,
}

/// One color per piano key, A0 (MIDI 21) through C8 (MIDI 108).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Keyboard([KeyColor; KEY_COUNT]);

impl Default for Keyboard {
    fn default() -> Self {
        Keyboard([KeyColor::Off; KEY_COUNT])
    }
}

impl Keyboard {
    /// `Off` for pitches outside the 88-key range.
    pub fn color(&self, pitch: Pitch) -> KeyColor {
        Self::index(pitch).map_or(KeyColor::Off, |i| self.0[i])
    }

    pub fn set(&mut self, pitch: Pitch, color: KeyColor) {
        if let Some(i) = Self::index(pitch) {
            self.0[i] = color;
        }
    }

    fn index(pitch: Pitch) -> Option<usize> {
        let n = pitch.number();
        (LOWEST_KEY..=HIGHEST_KEY).contains(&n).then(|| (n - LOWEST_KEY) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pitch, KeyColor)> + '_ {
        self.0.iter().enumerate().map(|(i, &c)| (Pitch::new(LOWEST_KEY as i32 + i as i32).expect("in range"), c))
    }

    pub fn pitches_with(&self, color: KeyColor) -> Vec<u8> {
        self.iter().filter(|&(_, c)| c == color).map(|(p, _)| p.number()).collect()
    }

    pub fn as_slice(&self) -> &[KeyColor] {
        &self.0
    }
}

impl Serialize for Keyboard {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for Keyboard {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<KeyColor>::deserialize(d)?;
        let arr: [KeyColor; KEY_COUNT] = v
            .try_into()
            .map_err(|v: Vec<KeyColor>| serde::de::Error::invalid_length(v.len(), &"exactly 88 key colors"))?;
        Ok(Keyboard(arr))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FallingNote {
    pub pitch: Pitch,
    pub hit_tick: u64,
    pub duration_ticks: u64,
    pub color: KeyColor,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HighlightFrame {
    pub frame_tick: u64,
    pub key_colors: Keyboard,
    /// Sorted by `hit_tick`, then pitch. Empty outside the roll modes.
    pub falling: Vec<FallingNote>,
    pub active_chord: Option<Chord>,
    /// Start tick of the active chord in the roll modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_start_tick: Option<u64>,
}

impl HighlightFrame {
    pub fn blank(frame_tick: u64) -> Self {
        HighlightFrame { frame_tick, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LessonMode {
    GuidedPress,
    RollingImprov,
    OnwaitRoll,
    ExpertPress,
}

impl LessonMode {
    pub fn is_roll(self) -> bool {
        matches!(self, LessonMode::RollingImprov | LessonMode::OnwaitRoll)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproachKind {
    #[default]
    HalfStep,
    ScaleAbove,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModeConfig {
    pub mode: LessonMode,
    pub approaches_on: bool,
    pub approach_kind: ApproachKind,
    pub half_step_direction: HalfStepDirection,
    pub split_pitch: Pitch,
    pub hit_window_ms: f64,
    pub lookahead_beats: f64,
    /// Correct presses needed before OnWait moves to the next chord.
    pub required_hits: u32,
    /// Whether approach notes also count toward OnWait advancement.
    pub gate_on_approaches: bool,
}

impl Default for ModeConfig {
    fn default() -> Self {
        ModeConfig {
            mode: LessonMode::GuidedPress,
            approaches_on: false,
            approach_kind: ApproachKind::HalfStep,
            half_step_direction: HalfStepDirection::Below,
            split_pitch: Pitch::MIDDLE_C,
            hit_window_ms: 100.0,
            lookahead_beats: 4.0,
            required_hits: 1,
            gate_on_approaches: false,
        }
    }
}

impl ModeConfig {
    pub fn with_mode(mode: LessonMode) -> Self {
        ModeConfig { mode, ..Default::default() }
    }

    /// `split_pitch` must lie on the keyboard.
    pub fn is_valid(&self) -> bool {
        (LOWEST_KEY..=HIGHEST_KEY).contains(&self.split_pitch.number())
            && self.hit_window_ms >= 0.0
            && self.lookahead_beats >= 0.0
            && self.required_hits >= 1
    }
}

pub fn set_mode(cfg: ModeConfig, new_mode: LessonMode) -> ModeConfig {
    ModeConfig { mode: new_mode, ..cfg }
}

pub fn toggle_approaches(cfg: ModeConfig) -> ModeConfig {
    ModeConfig { approaches_on: !cfg.approaches_on, ..cfg }
}

/// The approach pitch classes selected by `cfg` for `chord`. Scale-above uses
/// the chord's chord-scale, or the key's scale when no mapping exists.
pub fn approach_set(chord: Chord, key: Key, cfg: &ModeConfig) -> PitchClassSet {
    let half = || half_step_approaches_from(chord, cfg.half_step_direction);
    let above = || scale_above_approaches(chord, chord_scale(chord, key).unwrap_or_else(|_| key.scale()));
    match cfg.approach_kind {
        ApproachKind::HalfStep => half(),
        ApproachKind::ScaleAbove => above(),
        ApproachKind::Both => half().union(above()),
    }
}

fn paint(chord: Chord, key: Key, cfg: &ModeConfig, yellow_below: bool) -> Keyboard {
    let tones = chord_tones(chord);
    let approaches = if cfg.approaches_on { approach_set(chord, key, cfg) } else { PitchClassSet::EMPTY };
    let mut kb = Keyboard::default();
    for n in LOWEST_KEY..=HIGHEST_KEY {
        let pitch = Pitch::new(n as i32).expect("keyboard range");
        let pc = pitch.pitch_class();
        let color = if pitch < cfg.split_pitch {
            if yellow_below && tones.contains(pc) {
                KeyColor::ProgressionYellow
            } else {
                KeyColor::Off
            }
        } else if tones.contains(pc) {
            KeyColor::ChordTonePink
        } else if approaches.contains(pc) {
            KeyColor::ApproachPurple
        } else {
            KeyColor::Off
        };
        kb.set(pitch, color);
    }
    kb
}

/// Guided Press: the active chord in yellow below the split, its tones in pink
/// (and approaches in purple) above.
pub fn guided_press_frame(realized: &[TimedChord], index: usize, key: Key, cfg: &ModeConfig) -> HighlightFrame {
    let Some(tc) = realized.get(index) else {
        return HighlightFrame::blank(realized.last().map_or(0, TimedChord::end_tick));
    };
    HighlightFrame {
        frame_tick: tc.start_tick,
        key_colors: paint(tc.chord, key, cfg, true),
        falling: Vec::new(),
        active_chord: Some(tc.chord),
        active_start_tick: None,
    }
}

fn lookahead_ticks(cfg: &ModeConfig, ticks_per_beat: u64) -> u64 {
    (cfg.lookahead_beats * ticks_per_beat as f64).round() as u64
}

fn roll_frame_at(realized: &[TimedChord], position: u64, ticks_per_beat: u64, key: Key, cfg: &ModeConfig) -> HighlightFrame {
    let horizon = position + lookahead_ticks(cfg, ticks_per_beat);
    let mut falling = Vec::new();
    for tc in realized.iter().filter(|tc| (position..=horizon).contains(&tc.start_tick)) {
        let tones = chord_tones(tc.chord);
        for n in LOWEST_KEY..cfg.split_pitch.number() {
            let pitch = Pitch::new(n as i32).expect("keyboard range");
            if tones.contains(pitch.pitch_class()) {
                falling.push(FallingNote {
                    pitch,
                    hit_tick: tc.start_tick,
                    duration_ticks: tc.duration_ticks,
                    color: KeyColor::ProgressionYellow,
                });
            }
        }
    }
    falling.sort_by_key(|f| (f.hit_tick, f.pitch));
    let active = realized.iter().find(|tc| tc.contains(position));
    HighlightFrame {
        frame_tick: position,
        key_colors: active.map(|tc| paint(tc.chord, key, cfg, true)).unwrap_or_default(),
        falling,
        active_chord: active.map(|tc| tc.chord),
        active_start_tick: active.map(|tc| tc.start_tick),
    }
}

/// Rolling Improv: upcoming chords fall as yellow notes within the lookahead
/// window (both ends inclusive); the chord under the playhead is revealed.
pub fn rolling_frame(realized: &[TimedChord], t: &Transport, key: Key, cfg: &ModeConfig) -> HighlightFrame {
    roll_frame_at(realized, t.position_tick, t.ticks_per_beat(), key, cfg)
}

/// Progress through a progression that only moves on correct presses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnWaitState {
    pub realized: Vec<TimedChord>,
    /// Active chord; `realized.len()` once the progression is finished.
    pub index: usize,
    pub hits: u32,
    pub ticks_per_beat: u64,
}

impl OnWaitState {
    pub fn new(realized: Vec<TimedChord>, ticks_per_beat: u64) -> Self {
        OnWaitState { realized, index: 0, hits: 0, ticks_per_beat }
    }

    pub fn is_finished(&self) -> bool {
        self.index >= self.realized.len()
    }

    pub fn active(&self) -> Option<&TimedChord> {
        self.realized.get(self.index)
    }

    pub fn virtual_position(&self) -> u64 {
        match self.active() {
            Some(tc) => tc.start_tick,
            None => self.realized.last().map_or(0, TimedChord::end_tick),
        }
    }

    pub fn frame(&self, key: Key, cfg: &ModeConfig) -> HighlightFrame {
        roll_frame_at(&self.realized, self.virtual_position(), self.ticks_per_beat, key, cfg)
    }

    /// Whether `event` is a press that counts toward advancing.
    pub fn accepts(&self, event: &MidiEvent, key: Key, cfg: &ModeConfig) -> bool {
        let EventKind::NoteOn { pitch, .. } = event.kind else {
            return false;
        };
        let Some(tc) = self.active() else {
            return false;
        };
        if pitch < cfg.split_pitch {
            return false;
        }
        let pc = pitch.pitch_class();
        chord_tones(tc.chord).contains(pc)
            || (cfg.gate_on_approaches && cfg.approaches_on && approach_set(tc.chord, key, cfg).contains(pc))
    }
}

/// OnWait Roll: the roll frozen at the active chord until it is answered.
pub fn onwait_step(state: &OnWaitState, event: &MidiEvent, key: Key, cfg: &ModeConfig) -> (OnWaitState, HighlightFrame) {
    let mut next = state.clone();
    if state.accepts(event, key, cfg) {
        next.hits += 1;
        if next.hits >= cfg.required_hits.max(1) {
            next.index += 1;
            next.hits = 0;
        }
    }
    let frame = next.frame(key, cfg);
    (next, frame)
}

/// Expert Press: the chord held below the split, when recognized, lights its
/// tones above the split.
pub fn expert_press_step(held: &HeldNotes, cfg: &ModeConfig, key: Key) -> HighlightFrame {
    match recognize_chord(&held.below(cfg.split_pitch)) {
        Some(chord) => HighlightFrame {
            frame_tick: 0,
            key_colors: paint(chord, key, cfg, false),
            falling: Vec::new(),
            active_chord: Some(chord),
            active_start_tick: None,
        },
        None => HighlightFrame::blank(0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressClass {
    ChordToneHit,
    ApproachHit,
    ProgressionHit,
    OutOfSet,
    Early,
    Late,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressOutcome {
    pub class: PressClass,
    /// Signed press time minus target time, for presses aimed at a falling note.
    pub timing_error_ms: Option<f64>,
}

fn class_for(color: KeyColor) -> PressClass {
    match color {
        KeyColor::ChordTonePink => PressClass::ChordToneHit,
        KeyColor::ApproachPurple => PressClass::ApproachHit,
        KeyColor::ProgressionYellow => PressClass::ProgressionHit,
        KeyColor::Off => PressClass::OutOfSet,
    }
}

/// Classifies a note-on against the frame it was played over. In Rolling
/// Improv, presses aimed at a yellow target (a falling note, or a yellow key
/// of the sounding chord) are judged against the nearest target's hit time.
pub fn press_outcome(event: &MidiEvent, frame: &HighlightFrame, t: &Transport, cfg: &ModeConfig) -> PressOutcome {
    let Some(pitch) = event.pitch() else {
        return PressOutcome { class: PressClass::OutOfSet, timing_error_ms: None };
    };
    let color = frame.key_colors.color(pitch);
    if cfg.mode != LessonMode::RollingImprov {
        return PressOutcome { class: class_for(color), timing_error_ms: None };
    }
    let position = t.position_tick;
    let sounding = (color == KeyColor::ProgressionYellow).then_some(frame.active_start_tick).flatten();
    let target = frame
        .falling
        .iter()
        .filter(|f| f.pitch == pitch && f.color == KeyColor::ProgressionYellow)
        .map(|f| f.hit_tick)
        .chain(sounding)
        .min_by_key(|&hit| (hit.abs_diff(position), hit));
    let Some(hit) = target else {
        return PressOutcome { class: class_for(color), timing_error_ms: None };
    };
    let error_ms = t.tick_to_ms(position as f64) - t.tick_to_ms(hit as f64);
    let class = if error_ms.abs() <= cfg.hit_window_ms {
        PressClass::ProgressionHit
    } else if error_ms < 0.0 {
        PressClass::Early
    } else {
        PressClass::Late
    };
    PressOutcome { class, timing_error_ms: Some(error_ms) }
}

pub fn classify_press(event: &MidiEvent, frame: &HighlightFrame, t: &Transport, cfg: &ModeConfig) -> PressClass {
    press_outcome(event, frame, t, cfg).class
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{realize_progression, ChordQuality, PitchClass, Progression};

    fn c_major() -> Key {
        Key::major(PitchClass::C)
    }

    fn ii_v_i() -> Vec<TimedChord> {
        realize_progression(&Progression::two_five_one(), c_major(), 480).unwrap()
    }

    fn cmaj7_only() -> Vec<TimedChord> {
        vec![TimedChord {
            chord: Chord::new(PitchClass::C, ChordQuality::Maj7),
            start_tick: 0,
            duration_ticks: 1920,
        }]
    }

    fn p(n: i32) -> Pitch {
        Pitch::new(n).unwrap()
    }

    /// Independent oracle: every key in range whose pitch class is in `pcs`,
    /// filtered by register.
    fn keys_with(pcs: &[u8], below_split: bool) -> Vec<u8> {
        (21u8..=108).filter(|&n| (n < 60) == below_split && pcs.contains(&(n % 12))).collect()
    }

    #[test]
    fn guided_cmaj7() {
        let cfg = ModeConfig::default();
        let f = guided_press_frame(&cmaj7_only(), 0, c_major(), &cfg);
        assert_eq!(f.key_colors.pitches_with(KeyColor::ProgressionYellow), keys_with(&[0, 4, 7, 11], true));
        let yellow = f.key_colors.pitches_with(KeyColor::ProgressionYellow);
        assert!(yellow.ends_with(&[48, 52, 55, 59]));
        assert_eq!(f.key_colors.pitches_with(KeyColor::ChordTonePink), keys_with(&[0, 4, 7, 11], false));
        assert!(f.key_colors.pitches_with(KeyColor::ChordTonePink).starts_with(&[60, 64, 67, 71, 72]));
        assert!(f.key_colors.pitches_with(KeyColor::ApproachPurple).is_empty());
        assert!(f.falling.is_empty());
    }

    #[test]
    fn guided_with_half_step_approaches() {
        let cfg = toggle_approaches(ModeConfig::default());
        let f = guided_press_frame(&cmaj7_only(), 0, c_major(), &cfg);
        assert_eq!(f.key_colors.pitches_with(KeyColor::ApproachPurple), keys_with(&[3, 6, 10], false));
        // toggling back restores the exact prior frame
        let off = toggle_approaches(cfg);
        assert_eq!(guided_press_frame(&cmaj7_only(), 0, c_major(), &off), guided_press_frame(&cmaj7_only(), 0, c_major(), &ModeConfig::default()));
    }

    #[test]
    fn approach_kinds() {
        let cmaj7 = Chord::new(PitchClass::C, ChordQuality::Maj7);
        let mut cfg = ModeConfig { approach_kind: ApproachKind::ScaleAbove, ..Default::default() };
        let set = |cfg: &ModeConfig| approach_set(cmaj7, c_major(), cfg).iter().map(|p| p.value()).collect::<Vec<_>>();
        assert_eq!(set(&cfg), vec![2, 5, 9]);
        cfg.approach_kind = ApproachKind::Both;
        assert_eq!(set(&cfg), vec![2, 3, 5, 6, 9, 10]);
        // dim7 has no chord-scale mapping: falls back to the key's scale
        let dim = Chord::new(PitchClass::new(11), ChordQuality::Dim7);
        cfg.approach_kind = ApproachKind::ScaleAbove;
        assert!(!approach_set(dim, c_major(), &cfg).is_empty());
    }

    #[test]
    fn rolling_at_zero_and_bar_two() {
        let cfg = ModeConfig::with_mode(LessonMode::RollingImprov);
        let t = Transport::new(120.0, 480).started();
        let f = rolling_frame(&ii_v_i(), &t, c_major(), &cfg);
        let hits: Vec<u64> = f.falling.iter().map(|n| n.hit_tick).collect();
        let mut expected: Vec<u64> = Vec::new();
        // boundary-inclusive oracle: chord starts within [0, 1920]
        for (start, pcs) in [(0u64, [2u8, 5, 9, 0]), (1920, [7, 11, 2, 5])] {
            expected.extend(keys_with(&pcs, true).iter().map(|_| start));
        }
        assert_eq!(hits, expected);
        assert!(f.falling.iter().all(|n| n.pitch.number() < 60 && n.color == KeyColor::ProgressionYellow));
        assert_eq!(f.key_colors.pitches_with(KeyColor::ChordTonePink), keys_with(&[2, 5, 9, 0], false));
        assert_eq!(f.active_chord, Some(Chord::new(PitchClass::new(2), ChordQuality::Min7)));

        let f2 = rolling_frame(&ii_v_i(), &t.at(1920), c_major(), &cfg);
        assert_eq!(f2.key_colors.pitches_with(KeyColor::ChordTonePink), keys_with(&[7, 11, 2, 5], false));
        assert_eq!(rolling_frame(&ii_v_i(), &t.at(1920), c_major(), &cfg), f2);

        let past = rolling_frame(&ii_v_i(), &t.at(6000), c_major(), &cfg);
        assert_eq!(past.active_chord, None);
        assert!(past.falling.is_empty());
    }

    #[test]
    fn onwait_examples() {
        let cfg = ModeConfig::with_mode(LessonMode::OnwaitRoll);
        let s = OnWaitState::new(ii_v_i(), 480);
        let (s1, f1) = onwait_step(&s, &MidiEvent::note_on(0, 0, p(65), 80), c_major(), &cfg);
        assert_eq!(s1.index, 1);
        assert_eq!(f1.active_chord, Some(Chord::new(PitchClass::new(7), ChordQuality::Dom7)));
        assert_eq!(f1.frame_tick, 1920);
        let (s2, _) = onwait_step(&s, &MidiEvent::note_on(0, 0, p(64), 80), c_major(), &cfg);
        assert_eq!(s2, s);
        let (s3, _) = onwait_step(&s, &MidiEvent::note_on(0, 0, p(50), 80), c_major(), &cfg);
        assert_eq!(s3, s);
        let (s4, _) = onwait_step(&s, &MidiEvent::note_off(0, 0, p(65)), c_major(), &cfg);
        assert_eq!(s4, s);
    }

    #[test]
    fn onwait_required_hits_and_completion() {
        let cfg = ModeConfig { required_hits: 2, ..ModeConfig::with_mode(LessonMode::OnwaitRoll) };
        let mut s = OnWaitState::new(ii_v_i(), 480);
        let press = |n| MidiEvent::note_on(0, 0, p(n), 80);
        s = onwait_step(&s, &press(62), c_major(), &cfg).0;
        assert_eq!((s.index, s.hits), (0, 1));
        s = onwait_step(&s, &press(62), c_major(), &cfg).0;
        assert_eq!((s.index, s.hits), (1, 0));
        for n in [67, 67, 72, 76] {
            s = onwait_step(&s, &press(n), c_major(), &cfg).0;
        }
        assert!(s.is_finished());
        let (done, frame) = onwait_step(&s, &press(72), c_major(), &cfg);
        assert_eq!(done.index, 3);
        assert_eq!(frame.active_chord, None);
    }

    #[test]
    fn onwait_gate_on_approaches() {
        let cfg = ModeConfig {
            approaches_on: true,
            gate_on_approaches: true,
            ..ModeConfig::with_mode(LessonMode::OnwaitRoll)
        };
        let s = OnWaitState::new(ii_v_i(), 480);
        // C# is a half-step approach to Dm7
        let (s1, _) = onwait_step(&s, &MidiEvent::note_on(0, 0, p(61), 80), c_major(), &cfg);
        assert_eq!(s1.index, 1);
    }

    #[test]
    fn expert_examples() {
        let cfg = ModeConfig::with_mode(LessonMode::ExpertPress);
        let held = HeldNotes::from_pitches([50, 53, 57, 59].map(p));
        // D F A B reads as Dm6 or Bm7b5; the bass picks Dm6
        let f = expert_press_step(&held, &cfg, c_major());
        assert_eq!(f.active_chord, Some(Chord::new(PitchClass::new(2), ChordQuality::Min6)));

        // C under D F A: neither candidate root is in the bass, smallest root wins
        let held = HeldNotes::from_pitches([50, 53, 57].into_iter().chain([48]).map(p));
        let f = expert_press_step(&held, &cfg, c_major());
        assert_eq!(f.active_chord, Some(Chord::new(PitchClass::new(2), ChordQuality::Min7)));

        let held = HeldNotes::from_pitches([50, 53, 57, 60].map(p));
        let f = expert_press_step(&held, &cfg, c_major());
        // 60 sits at the split, so only D F A are below: D minor triad
        assert_eq!(f.active_chord, Some(Chord::new(PitchClass::new(2), ChordQuality::TriadMin)));

        let split = ModeConfig { split_pitch: p(61), ..cfg };
        let f = expert_press_step(&held, &split, c_major());
        assert_eq!(f.active_chord, Some(Chord::new(PitchClass::new(2), ChordQuality::Min7)));
        assert_eq!(f.key_colors.pitches_with(KeyColor::ChordTonePink), (61u8..=108).filter(|n| [2, 5, 9, 0].contains(&(n % 12))).collect::<Vec<_>>());
        assert!(f.key_colors.pitches_with(KeyColor::ProgressionYellow).is_empty());

        let f = expert_press_step(&HeldNotes::from_pitches([48, 50].map(p)), &cfg, c_major());
        assert_eq!(f, HighlightFrame::blank(0));
    }

    #[test]
    fn classify_examples() {
        let cfg = toggle_approaches(ModeConfig::default());
        let frame = guided_press_frame(&cmaj7_only(), 0, c_major(), &cfg);
        let t = Transport::new(120.0, 480);
        let class = |n| classify_press(&MidiEvent::note_on(0, 0, p(n), 80), &frame, &t, &cfg);
        assert_eq!(class(76), PressClass::ChordToneHit);
        assert_eq!(class(75), PressClass::ApproachHit);
        assert_eq!(class(61), PressClass::OutOfSet);
        assert_eq!(class(48), PressClass::ProgressionHit);
        assert_eq!(class(10), PressClass::OutOfSet);
    }

    #[test]
    fn rolling_timing_classes() {
        let cfg = ModeConfig::with_mode(LessonMode::RollingImprov);
        let t = Transport::new(120.0, 480).started();
        // G2 (43) is a G7 chord tone; G7 lands at 1920 = 2000 ms
        let at = |tick: u64, n: i32| {
            let tt = t.at(tick);
            let frame = rolling_frame(&ii_v_i(), &tt, c_major(), &cfg);
            press_outcome(&MidiEvent::note_on(tick, 0, p(n), 80), &frame, &tt, &cfg)
        };
        assert_eq!(at(1920 - 48, 43).class, PressClass::ProgressionHit); // 50 ms early
        let early = at(1920 - 192, 43); // 200 ms early
        assert_eq!(early.class, PressClass::Early);
        assert_eq!(early.timing_error_ms, Some(-200.0));
        assert_eq!(at(1920 + 48, 43).class, PressClass::ProgressionHit);
        assert_eq!(at(1920 + 192, 43).class, PressClass::Late);
        // pink keys above the split are never timed
        let pink = at(1920 + 192, 67);
        assert_eq!(pink, PressOutcome { class: PressClass::ChordToneHit, timing_error_ms: None });
        // a key with no yellow target at all
        assert_eq!(at(100, 44).class, PressClass::OutOfSet);
    }

    #[test]
    fn mode_config_updates() {
        let cfg = ModeConfig::default();
        assert_eq!(toggle_approaches(toggle_approaches(cfg)), cfg);
        assert_eq!(set_mode(cfg, cfg.mode), cfg);
        assert_eq!(set_mode(cfg, LessonMode::ExpertPress).mode, LessonMode::ExpertPress);
        assert!(cfg.is_valid());
        assert!(!ModeConfig { split_pitch: p(10), ..cfg }.is_valid());
    }

    #[test]
    fn frame_serialization_is_stable() {
        let f = guided_press_frame(&cmaj7_only(), 0, c_major(), &ModeConfig::default());
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<HighlightFrame>(&json).unwrap(), f);
        assert!(json.contains("\"progression_yellow\""));
        let short = json.replacen("\"off\",", "", 1);
        assert!(serde_json::from_str::<HighlightFrame>(&short).is_err());
    }
}
