//! The single-writer session engine.
//!
//! One [`Engine`] owns the transport, mode state and session log. Inputs
//! arrive as [`ClientMessage`]s or clock advances, in order; every call
//! returns the [`ServerMessage`]s it produced. Nothing here reads the wall
//! clock, so a session replays identically from recorded timing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{apply_swing, metronome_between, remove_swing, ClockError, SwingProfile, Transport, DEFAULT_PPQ};
use crate::curriculum::{
    builtin_lessons_in, lesson_by_id, qa_compare, score_session, ClassifiedPress, ContentId, CurriculumError, Evaluation,
    LessonSpec, QaConfig, SessionReport,
};
use crate::midi::{MidiEvent, MidiFile};
use crate::modes::{
    expert_press_step, guided_press_frame, press_outcome, rolling_frame, set_mode, toggle_approaches, HighlightFrame,
    LessonMode, ModeConfig, OnWaitState,
};
use crate::protocol::{ClientMessage, LessonSummary, ServerMessage};
use crate::recognition::{classify_variation, is_sequence, segment_motifs, HeldNotes, Motif, MotifRelation, Segmentation};
use crate::theory::{realize_progression, Key, Pitch, PitchClass, Progression, Scale, TheoryError, TimedChord};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Curriculum(#[from] CurriculumError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error("lesson {lesson} has no exercise {exercise}")]
    NoExercise { lesson: u32, exercise: usize },
    #[error("content {id}: {reason}")]
    Content { id: ContentId, reason: String },
    #[error("replay speed must be positive and finite, got {0}")]
    BadSpeed(f64),
}

/// Resolves content ids to parsed MIDI files.
pub trait ContentSource {
    fn load(&self, id: &ContentId) -> Result<MidiFile, String>;
}

/// A source with nothing in it.
pub struct NoContent;

impl ContentSource for NoContent {
    fn load(&self, id: &ContentId) -> Result<MidiFile, String> {
        Err(format!("no content named {id}"))
    }
}

impl<F: Fn(&ContentId) -> Result<MidiFile, String>> ContentSource for F {
    fn load(&self, id: &ContentId) -> Result<MidiFile, String> {
        self(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineSettings {
    pub key: Key,
    pub tempo_bpm: f64,
    pub ppq: u32,
    pub swing_ratio: f64,
    pub split_pitch: Pitch,
    pub hit_window_ms: f64,
    pub metronome: bool,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            key: Key::major(PitchClass::C),
            tempo_bpm: 120.0,
            ppq: DEFAULT_PPQ,
            swing_ratio: 1.0,
            split_pitch: Pitch::MIDDLE_C,
            hit_window_ms: 100.0,
            metronome: true,
        }
    }
}

pub struct Engine {
    settings: EngineSettings,
    lessons: Vec<LessonSpec>,
    cfg: ModeConfig,
    key: Key,
    scale: Option<Scale>,
    swing: SwingProfile,
    evaluation: Evaluation,
    lesson: Option<(u32, usize)>,
    realized: Vec<TimedChord>,
    transport: Transport,
    onwait: OnWaitState,
    held: HeldNotes,
    clock_ms: f64,
    /// Straight-grid ticks at engine resolution.
    accompaniment: Vec<MidiEvent>,
    accompaniment_cursor: usize,
    questions: Vec<Motif>,
    presses: Vec<ClassifiedPress>,
    played: Vec<MidiEvent>,
    last_click: Option<u64>,
}

impl Engine {
    pub fn new(settings: EngineSettings) -> Self {
        let transport = Transport::new(settings.tempo_bpm, settings.ppq);
        let swing = SwingProfile::new(settings.swing_ratio, Default::default()).unwrap_or(SwingProfile::STRAIGHT);
        let cfg = ModeConfig {
            split_pitch: settings.split_pitch,
            hit_window_ms: settings.hit_window_ms,
            ..Default::default()
        };
        let realized = realize_progression(&Progression::two_five_one(), settings.key, settings.ppq).unwrap_or_default();
        let onwait = OnWaitState::new(realized.clone(), transport.ticks_per_beat());
        Engine {
            lessons: builtin_lessons_in(settings.key.tonic),
            settings,
            cfg,
            key: settings.key,
            scale: None,
            swing,
            evaluation: Evaluation::PressAccuracy,
            lesson: None,
            realized,
            transport,
            onwait,
            held: HeldNotes::new(),
            clock_ms: 0.0,
            accompaniment: Vec::new(),
            accompaniment_cursor: 0,
            questions: Vec::new(),
            presses: Vec::new(),
            played: Vec::new(),
            last_click: None,
        }
    }

    pub fn settings(&self) -> &EngineSettings {
        &self.settings
    }

    pub fn config(&self) -> &ModeConfig {
        &self.cfg
    }

    pub fn transport(&self) -> &Transport {
        &self.transport
    }

    pub fn onwait(&self) -> &OnWaitState {
        &self.onwait
    }

    pub fn lessons(&self) -> &[LessonSpec] {
        &self.lessons
    }

    pub fn presses(&self) -> &[ClassifiedPress] {
        &self.presses
    }

    pub fn lesson_list(&self) -> ServerMessage {
        ServerMessage::LessonList { lessons: self.lessons.iter().map(LessonSummary::from).collect() }
    }

    /// Applies one client message. Failures come back as an `error` message.
    pub fn handle(&mut self, msg: ClientMessage, content: &dyn ContentSource) -> Vec<ServerMessage> {
        self.try_handle(msg, content).unwrap_or_else(|e| vec![ServerMessage::error(e.to_string())])
    }

    pub fn try_handle(&mut self, msg: ClientMessage, content: &dyn ContentSource) -> Result<Vec<ServerMessage>, EngineError> {
        Ok(match msg {
            ClientMessage::NoteOn { pitch, velocity } => self.note_on(pitch, velocity),
            ClientMessage::NoteOff { pitch } => self.note_off(pitch),
            ClientMessage::SetMode { mode } => {
                self.cfg = set_mode(self.cfg, mode);
                vec![self.frame_message()]
            }
            ClientMessage::ToggleApproaches => {
                self.cfg = toggle_approaches(self.cfg);
                vec![self.frame_message()]
            }
            ClientMessage::SetTempo { bpm } => {
                self.transport.set_tempo(bpm)?;
                Vec::new()
            }
            ClientMessage::SetSwing { ratio } => {
                self.swing = SwingProfile::new(ratio, self.swing.subdivision)?;
                Vec::new()
            }
            ClientMessage::SelectLesson { id, exercise } => self.select_lesson(id, exercise, content)?,
            ClientMessage::Start => self.start(),
            ClientMessage::Stop => self.stop(),
            ClientMessage::LoadContent { id } => {
                let file = content.load(&id).map_err(|reason| EngineError::Content { id, reason })?;
                self.set_accompaniment(&file);
                Vec::new()
            }
        })
    }

    /// Loads exercise `exercise` of lesson `id` and resets the session.
    pub fn select_lesson(
        &mut self,
        id: u32,
        exercise: usize,
        content: &dyn ContentSource,
    ) -> Result<Vec<ServerMessage>, EngineError> {
        let lesson = lesson_by_id(&self.lessons, id)?;
        let ex = lesson.exercises.get(exercise).cloned().ok_or(EngineError::NoExercise { lesson: id, exercise })?;
        self.cfg = ModeConfig {
            split_pitch: self.settings.split_pitch,
            hit_window_ms: self.settings.hit_window_ms,
            ..ex.mode
        };
        self.key = ex.key;
        self.scale = ex.scale;
        self.swing = ex.swing;
        self.evaluation = ex.evaluation;
        self.realized = match &ex.progression {
            Some(p) => realize_progression(p, ex.key, self.transport.ppq)?,
            None => Vec::new(),
        };
        self.lesson = Some((id, exercise));
        self.accompaniment.clear();
        self.questions.clear();
        let mut out = Vec::new();
        if let Some(cid) = &ex.content_ref {
            match content.load(cid) {
                Ok(file) if ex.evaluation == Evaluation::QaExchange => {
                    let events = self.rescale(&file);
                    self.questions = segment_motifs(&events, Segmentation::for_ppq(self.transport.ppq));
                }
                Ok(file) => self.set_accompaniment(&file),
                Err(reason) => out.push(ServerMessage::error(format!("content {cid}: {reason}"))),
            }
        }
        self.reset_session();
        out.push(self.frame_message());
        Ok(out)
    }

    fn rescale(&self, file: &MidiFile) -> Vec<MidiEvent> {
        let (from, to) = (file.ppq.max(1) as u128, self.transport.ppq as u128);
        file.note_events()
            .into_iter()
            .map(|mut e| {
                e.tick = ((e.tick as u128 * to + from / 2) / from) as u64;
                e
            })
            .collect()
    }

    fn set_accompaniment(&mut self, file: &MidiFile) {
        self.accompaniment = self.rescale(file);
        self.accompaniment_cursor =
            self.accompaniment.partition_point(|e| e.tick < self.transport.position_tick && self.transport.running);
    }

    fn reset_session(&mut self) {
        self.transport.position_tick = 0;
        self.onwait = OnWaitState::new(self.realized.clone(), self.transport.ticks_per_beat());
        self.presses.clear();
        self.played.clear();
        self.held.clear();
        self.accompaniment_cursor = 0;
        self.last_click = None;
    }

    pub fn start(&mut self) -> Vec<ServerMessage> {
        self.reset_session();
        self.transport.running = true;
        let mut out = self.scheduled_events();
        out.push(self.frame_message());
        out
    }

    pub fn stop(&mut self) -> Vec<ServerMessage> {
        self.transport.running = false;
        vec![ServerMessage::Report(self.report())]
    }

    /// Advances the virtual clock and returns metronome, accompaniment and
    /// frame messages for the elapsed span.
    pub fn advance(&mut self, elapsed_ms: f64) -> Vec<ServerMessage> {
        if elapsed_ms > 0.0 {
            self.clock_ms += elapsed_ms;
        }
        if !self.transport.running {
            return Vec::new();
        }
        self.transport = self.transport.advance(elapsed_ms);
        let mut out = self.scheduled_events();
        out.push(self.frame_message());
        out
    }

    /// Tick-exact variant of [`Engine::advance`], used by replay.
    pub fn advance_ticks(&mut self, ticks: u64) -> Vec<ServerMessage> {
        if !self.transport.running {
            return Vec::new();
        }
        self.clock_ms += self.transport.tick_to_ms(ticks as f64);
        self.transport = self.transport.advance_ticks(ticks);
        let mut out = self.scheduled_events();
        out.push(self.frame_message());
        out
    }

    fn scheduled_events(&mut self) -> Vec<ServerMessage> {
        let position = self.transport.position_tick;
        let mut out = Vec::new();
        if self.settings.metronome {
            let clicks = metronome_between(&self.transport, self.last_click, position);
            if let Some(last) = clicks.last() {
                self.last_click = Some(last.tick);
            }
            out.extend(clicks.into_iter().map(ServerMessage::MetronomeEvent));
        }
        while let Some(e) = self.accompaniment.get(self.accompaniment_cursor) {
            let swung = apply_swing(&self.swing, e.tick, self.transport.ppq);
            if swung > position {
                break;
            }
            let mut event = e.clone();
            event.tick = swung;
            out.push(ServerMessage::AccompanimentEvent { event });
            self.accompaniment_cursor += 1;
        }
        out
    }

    /// The frame for the current state.
    pub fn frame(&self) -> HighlightFrame {
        let position = self.transport.position_tick;
        match self.cfg.mode {
            LessonMode::GuidedPress => {
                let local = self.loop_position(position);
                let index = self.realized.iter().position(|tc| tc.contains(local)).unwrap_or(0);
                let mut frame = guided_press_frame(&self.realized, index, self.key, &self.cfg);
                frame.frame_tick = position;
                frame
            }
            LessonMode::RollingImprov => self.looping_roll_frame(position),
            LessonMode::OnwaitRoll => self.onwait.frame(self.key, &self.cfg),
            LessonMode::ExpertPress => {
                let mut frame = expert_press_step(&self.held, &self.cfg, self.key);
                frame.frame_tick = position;
                frame
            }
        }
    }

    fn cycle_ticks(&self) -> u64 {
        self.realized.last().map_or(0, TimedChord::end_tick)
    }

    fn loop_position(&self, position: u64) -> u64 {
        match self.cycle_ticks() {
            0 => position,
            cycle => position % cycle,
        }
    }

    /// The progression repeats; the frame is rendered at the loop-local
    /// position and shifted back to absolute ticks.
    fn looping_roll_frame(&self, position: u64) -> HighlightFrame {
        let cycle = self.cycle_ticks();
        if cycle == 0 {
            return HighlightFrame::blank(position);
        }
        let local = position % cycle;
        let lookahead = (self.cfg.lookahead_beats * self.transport.ticks_per_beat() as f64).round() as u64;
        let repeats = 1 + (local + lookahead) / cycle;
        let extended: Vec<TimedChord> = (0..=repeats)
            .flat_map(|r| {
                self.realized.iter().map(move |tc| TimedChord { start_tick: tc.start_tick + r * cycle, ..*tc })
            })
            .collect();
        let mut frame = rolling_frame(&extended, &self.transport.at(local), self.key, &self.cfg);
        let offset = position - local;
        frame.frame_tick = position;
        for f in &mut frame.falling {
            f.hit_tick += offset;
        }
        frame.active_start_tick = frame.active_start_tick.map(|t| t + offset);
        frame
    }

    fn frame_message(&self) -> ServerMessage {
        ServerMessage::Frame(self.frame())
    }

    pub fn note_on(&mut self, pitch: Pitch, velocity: u8) -> Vec<ServerMessage> {
        let event = MidiEvent::note_on(self.transport.position_tick, 0, pitch, velocity);
        if !event.is_note_on() {
            return self.note_off(pitch);
        }
        let mut out = Vec::new();
        let chord_gesture = self.cfg.mode == LessonMode::ExpertPress && pitch < self.cfg.split_pitch;
        if !chord_gesture {
            let frame = self.frame();
            let outcome = press_outcome(&event, &frame, &self.transport, &self.cfg);
            self.presses.push(ClassifiedPress::new(event.clone(), outcome));
            out.push(ServerMessage::PressClass {
                pitch,
                class: outcome.class,
                timing_error_ms: outcome.timing_error_ms,
            });
        }
        self.held.press(pitch, self.clock_ms);
        if self.cfg.mode == LessonMode::OnwaitRoll {
            self.onwait = crate::modes::onwait_step(&self.onwait, &event, self.key, &self.cfg).0;
        }
        self.record(event);
        out.push(self.frame_message());
        out
    }

    pub fn note_off(&mut self, pitch: Pitch) -> Vec<ServerMessage> {
        self.held.release(pitch);
        self.record(MidiEvent::note_off(self.transport.position_tick, 0, pitch));
        if self.cfg.mode == LessonMode::ExpertPress {
            vec![self.frame_message()]
        } else {
            Vec::new()
        }
    }

    /// Keeps right-hand notes, on the straight grid, for motif analysis.
    fn record(&mut self, mut event: MidiEvent) {
        if event.pitch().is_some_and(|p| p >= self.cfg.split_pitch) {
            event.tick = remove_swing(&self.swing, event.tick, self.transport.ppq);
            self.played.push(event);
        }
    }

    pub fn report(&self) -> SessionReport {
        let ppq = self.transport.ppq;
        let tolerance = QaConfig::for_ppq(ppq).tick_tolerance;
        let phrases = segment_motifs(&self.played, Segmentation::for_ppq(ppq));
        let motif_results: Vec<MotifRelation> = phrases
            .windows(2)
            .map(|w| {
                let sequence = self.scale.and_then(|s| is_sequence(&w[0], &w[1], s, tolerance).ok().flatten());
                match sequence {
                    Some(shift_degrees) => MotifRelation::Sequence { shift_degrees },
                    None => classify_variation(&w[0], &w[1], tolerance),
                }
            })
            .collect();
        let qa_results = self
            .questions
            .iter()
            .zip(phrases.iter().cloned())
            .map(|(q, a)| qa_compare(q, a, tolerance))
            .collect();
        let lesson_id = self.lesson.map_or(0, |(id, _)| id);
        score_session(&self.presses, motif_results, qa_results, lesson_id)
    }
}

/// Feeds a recorded performance through a lesson on a virtual clock.
///
/// At `speed` s the tempo is multiplied and the hit window divided by s, so
/// classification is unchanged for exact speed factors.
pub fn replay_performance(
    performance: &MidiFile,
    lesson_id: u32,
    speed: f64,
    mut settings: EngineSettings,
    content: &dyn ContentSource,
) -> Result<SessionReport, EngineError> {
    if !(speed.is_finite() && speed > 0.0) {
        return Err(EngineError::BadSpeed(speed));
    }
    settings.tempo_bpm = performance.initial_tempo_bpm() * speed;
    settings.hit_window_ms /= speed;
    settings.metronome = false;
    let mut engine = Engine::new(settings);
    engine.select_lesson(lesson_id, 0, content)?;
    engine.start();
    let (from, to) = (performance.ppq.max(1) as u128, settings.ppq as u128);
    for event in performance.note_events() {
        let tick = ((event.tick as u128 * to + from / 2) / from) as u64;
        let now = engine.transport().position_tick;
        if tick > now {
            engine.advance_ticks(tick - now);
        }
        match (event.pitch(), event.is_note_on()) {
            (Some(p), true) => engine.note_on(p, event.velocity().unwrap_or(80)),
            (Some(p), false) => engine.note_off(p),
            _ => Vec::new(),
        };
    }
    engine.stop();
    Ok(engine.report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::midi::{EventKind, MidiTrack};
    use crate::modes::{KeyColor, PressClass};

    fn p(n: i32) -> Pitch {
        Pitch::new(n).unwrap()
    }

    fn engine() -> Engine {
        Engine::new(EngineSettings::default())
    }

    fn frames(msgs: &[ServerMessage]) -> Vec<&HighlightFrame> {
        msgs.iter()
            .filter_map(|m| match m {
                ServerMessage::Frame(f) => Some(f),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn note_on_emits_class_then_frame() {
        let mut e = engine();
        let out = e.handle(ClientMessage::NoteOn { pitch: p(62), velocity: 80 }, &NoContent);
        assert!(matches!(out[0], ServerMessage::PressClass { class: PressClass::ChordToneHit, .. }));
        assert!(out[1].is_frame());
    }

    #[test]
    fn toggle_changes_next_frame_only() {
        let mut e = engine();
        let before = e.frame();
        let out = e.handle(ClientMessage::ToggleApproaches, &NoContent);
        let after = frames(&out)[0];
        assert!(!after.key_colors.pitches_with(KeyColor::ApproachPurple).is_empty());
        let out = e.handle(ClientMessage::ToggleApproaches, &NoContent);
        assert_eq!(frames(&out)[0], &before);
    }

    #[test]
    fn toggle_during_playback_keeps_position() {
        let mut e = engine();
        e.handle(ClientMessage::SetMode { mode: LessonMode::RollingImprov }, &NoContent);
        e.start();
        e.advance(750.0);
        let pos = e.transport().position_tick;
        e.handle(ClientMessage::ToggleApproaches, &NoContent);
        assert_eq!(e.transport().position_tick, pos);
        assert_eq!(pos, 720);
    }

    #[test]
    fn metronome_and_rolling_loop() {
        let mut e = engine();
        e.handle(ClientMessage::SetMode { mode: LessonMode::RollingImprov }, &NoContent);
        let out = e.start();
        assert!(matches!(out[0], ServerMessage::MetronomeEvent(c) if c.tick == 0 && c.accent));
        let out = e.advance(1000.0);
        let clicks: Vec<_> = out
            .iter()
            .filter_map(|m| match m {
                ServerMessage::MetronomeEvent(c) => Some(c.tick),
                _ => None,
            })
            .collect();
        assert_eq!(clicks, vec![480, 960]);
        // one full ii-V-I cycle is 6 s at 120 BPM; the loop brings Dm7 back
        e.advance(5000.0);
        let f = e.frame();
        assert_eq!(f.frame_tick, 5760);
        assert_eq!(f.active_chord.unwrap().to_string(), "Dm7");
        assert_eq!(f.active_start_tick, Some(5760));
        assert!(f.falling.iter().any(|n| n.hit_tick == 5760 + 1920));
    }

    #[test]
    fn errors_are_reported_not_fatal() {
        let mut e = engine();
        let out = e.handle(ClientMessage::SelectLesson { id: 9, exercise: 0 }, &NoContent);
        assert!(matches!(&out[0], ServerMessage::Error { message } if message.contains("9")));
        let out = e.handle(ClientMessage::SetTempo { bpm: -3.0 }, &NoContent);
        assert!(matches!(out[0], ServerMessage::Error { .. }));
        let out = e.handle(ClientMessage::SetSwing { ratio: 5.0 }, &NoContent);
        assert!(matches!(out[0], ServerMessage::Error { .. }));
        let out = e.handle(ClientMessage::LoadContent { id: ContentId::new("nope") }, &NoContent);
        assert!(matches!(out[0], ServerMessage::Error { .. }));
        // lesson 3 without its content still loads, with a warning first
        let out = e.handle(ClientMessage::SelectLesson { id: 3, exercise: 0 }, &NoContent);
        assert!(matches!(out[0], ServerMessage::Error { .. }));
        assert!(out[1].is_frame());
        assert_eq!(e.config().mode, LessonMode::RollingImprov);
    }

    #[test]
    fn expert_mode_chord_gesture_is_not_scored() {
        let mut e = engine();
        e.handle(ClientMessage::SelectLesson { id: 6, exercise: 0 }, &NoContent);
        for n in [50, 53, 57] {
            e.note_on(p(n), 80);
        }
        let out = e.note_on(p(48), 80);
        assert!(!out.iter().any(|m| matches!(m, ServerMessage::PressClass { .. })));
        assert_eq!(frames(&out)[0].active_chord.unwrap().to_string(), "Dm7");
        let out = e.note_on(p(65), 80);
        assert!(matches!(out[0], ServerMessage::PressClass { class: PressClass::ChordToneHit, .. }));
        e.note_off(p(50));
        e.note_off(p(53));
        let out = e.note_off(p(57));
        assert_eq!(frames(&out)[0].active_chord, None);
        assert_eq!(e.presses().len(), 1);
    }

    #[test]
    fn onwait_in_engine() {
        let mut e = engine();
        e.handle(ClientMessage::SetMode { mode: LessonMode::OnwaitRoll }, &NoContent);
        e.start();
        e.note_on(p(64), 80);
        assert_eq!(e.onwait().index, 0);
        let out = e.note_on(p(65), 80);
        assert_eq!(e.onwait().index, 1);
        assert_eq!(frames(&out)[0].frame_tick, 1920);
    }

    #[test]
    fn accompaniment_is_swung_and_streamed() {
        let mut e = engine();
        let file = MidiFile {
            format: 0,
            ppq: 96,
            tracks: vec![MidiTrack {
                events: vec![
                    MidiEvent::note_on(0, 0, p(40), 90),
                    MidiEvent::note_on(48, 0, p(43), 90),
                    MidiEvent::note_off(96, 0, p(40)),
                    MidiEvent::end(96),
                ],
            }],
        };
        let source = move |_: &ContentId| Ok(file.clone());
        e.handle(ClientMessage::LoadContent { id: ContentId::new("acc") }, &source);
        e.handle(ClientMessage::SetSwing { ratio: 2.0 }, &source);
        let out = e.start();
        let acc = |msgs: &[ServerMessage]| -> Vec<u64> {
            msgs.iter()
                .filter_map(|m| match m {
                    ServerMessage::AccompanimentEvent { event } => Some(event.tick),
                    _ => None,
                })
                .collect()
        };
        assert_eq!(acc(&out), vec![0]);
        // offbeat at straight 240 swings to 320 (333 ms at 120 BPM)
        assert!(acc(&e.advance(300.0)).is_empty());
        assert_eq!(acc(&e.advance(100.0)), vec![320]);
        assert_eq!(acc(&e.advance(200.0)), vec![480]);
    }

    #[test]
    fn stop_reports_session() {
        let mut e = engine();
        e.select_lesson(4, 0, &NoContent).unwrap();
        e.start();
        for n in [62, 65, 69, 61] {
            e.note_on(p(n), 80);
        }
        let out = e.stop();
        let ServerMessage::Report(r) = &out[0] else { panic!("expected report") };
        assert_eq!(r.lesson_id, 4);
        assert_eq!(r.accuracy_percent, 75.0);
        assert_eq!(r.counts.out_of_set, 1);
    }

    #[test]
    fn motif_results_detect_sequences() {
        let mut e = engine();
        e.select_lesson(5, 1, &NoContent).unwrap();
        e.start();
        let phrase = |e: &mut Engine, start: u64, pitches: [i32; 3]| {
            for (i, n) in pitches.into_iter().enumerate() {
                let t = start + i as u64 * 240;
                let now = e.transport().position_tick;
                e.advance_ticks(t - now);
                e.note_on(p(n), 80);
                e.advance_ticks(200);
                e.note_off(p(n));
            }
        };
        phrase(&mut e, 0, [60, 62, 64]);
        phrase(&mut e, 1920, [62, 64, 65]);
        phrase(&mut e, 3840, [62, 64, 65]);
        let r = e.report();
        assert_eq!(r.motif_results, vec![MotifRelation::Sequence { shift_degrees: 1 }, MotifRelation::Repeat]);
    }

    #[test]
    fn replay_empty_file() {
        let empty = MidiFile { format: 0, ppq: 480, tracks: vec![MidiTrack { events: vec![MidiEvent::end(0)] }] };
        let r = replay_performance(&empty, 4, 1.0, EngineSettings::default(), &NoContent).unwrap();
        assert!(r.empty);
        assert!(matches!(
            replay_performance(&empty, 4, 0.0, EngineSettings::default(), &NoContent),
            Err(EngineError::BadSpeed(_))
        ));
        assert!(matches!(
            replay_performance(&empty, 42, 1.0, EngineSettings::default(), &NoContent),
            Err(EngineError::Curriculum(CurriculumError::NotFound(42)))
        ));
    }

    #[test]
    fn replay_uses_file_tempo() {
        let file = MidiFile {
            format: 0,
            ppq: 480,
            tracks: vec![MidiTrack {
                events: vec![
                    MidiEvent { tick: 0, channel: 0, kind: EventKind::MetaTempo { us_per_quarter: 1_000_000 } },
                    MidiEvent::note_on(1920, 0, p(67), 80),
                    MidiEvent::end(1920),
                ],
            }],
        };
        let r = replay_performance(&file, 4, 1.0, EngineSettings::default(), &NoContent).unwrap();
        assert_eq!(r.counts.chord_tone_hit, 1);
    }
}
