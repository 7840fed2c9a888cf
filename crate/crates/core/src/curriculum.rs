//! The six-lesson curriculum, call-and-response checks and session scoring.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::SwingProfile;
use crate::midi::MidiEvent;
use crate::modes::{LessonMode, ModeConfig, PressClass, PressOutcome};
use crate::recognition::{classify_variation, rhythmic_match, segment_motifs, Motif, MotifRelation, Segmentation};
use crate::theory::{Key, Mode, PitchClass, Progression, Scale};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurriculumError {
    #[error("lesson {0} not found")]
    NotFound(u32),
    #[error("the answer contains no notes")]
    EmptyAnswer,
    #[error("the answer has a single note; a motif needs two")]
    AnswerTooShort,
    #[error("invalid lesson {id}: {reason}")]
    InvalidLesson { id: u32, reason: String },
}

/// Opaque identifier of an ingested MIDI file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContentId(pub String);

impl ContentId {
    pub fn new(id: impl Into<String>) -> Self {
        ContentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for ContentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    PressAccuracy,
    MotifRepeat,
    MotifSequence,
    RhythmMatch,
    QaExchange,
    FreeImprov,
}

impl Evaluation {
    /// Modes an evaluation may be paired with.
    pub fn allowed_modes(self) -> &'static [LessonMode] {
        use LessonMode::*;
        match self {
            Evaluation::PressAccuracy => &[GuidedPress, RollingImprov, OnwaitRoll, ExpertPress],
            Evaluation::MotifRepeat | Evaluation::MotifSequence => &[GuidedPress, OnwaitRoll, ExpertPress],
            Evaluation::RhythmMatch => &[RollingImprov, OnwaitRoll],
            Evaluation::QaExchange => &[RollingImprov, ExpertPress],
            Evaluation::FreeImprov => &[GuidedPress, RollingImprov, ExpertPress],
        }
    }

    /// Lessons that may use this evaluation; `None` means any.
    pub fn allowed_lessons(self) -> Option<&'static [u32]> {
        match self {
            Evaluation::QaExchange => Some(&[3, 5]),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exercise {
    pub mode: ModeConfig,
    pub progression: Option<Progression>,
    pub key: Key,
    pub scale: Option<Scale>,
    pub content_ref: Option<ContentId>,
    pub swing: SwingProfile,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LessonSpec {
    pub id: u32,
    pub title: String,
    pub objective: String,
    pub tools: Vec<String>,
    pub exercises: Vec<Exercise>,
}

impl LessonSpec {
    /// `"01 Swing"`.
    pub fn label(&self) -> String {
        format!("{:02} {}", self.id, self.title)
    }

    pub fn validate(&self) -> Result<(), CurriculumError> {
        let invalid = |reason: String| CurriculumError::InvalidLesson { id: self.id, reason };
        if !(1..=6).contains(&self.id) {
            return Err(invalid("id outside 1..=6".into()));
        }
        if self.exercises.is_empty() {
            return Err(invalid("no exercises".into()));
        }
        for (i, ex) in self.exercises.iter().enumerate() {
            if ex.evaluation == Evaluation::QaExchange && ex.content_ref.is_none() {
                return Err(invalid(format!("exercise {i}: qa_exchange needs question content")));
            }
            if !ex.evaluation.allowed_modes().contains(&ex.mode.mode) {
                return Err(invalid(format!("exercise {i}: {:?} cannot be run in {:?}", ex.evaluation, ex.mode.mode)));
            }
            if let Some(lessons) = ex.evaluation.allowed_lessons() {
                if !lessons.contains(&self.id) {
                    return Err(invalid(format!("exercise {i}: {:?} not allowed in this lesson", ex.evaluation)));
                }
            }
            if !ex.mode.is_valid() {
                return Err(invalid(format!("exercise {i}: invalid mode config")));
            }
        }
        Ok(())
    }
}

/// Validates a lesson list: each lesson valid and ids unique.
pub fn validate_lessons(lessons: &[LessonSpec]) -> Result<(), CurriculumError> {
    let mut seen = Vec::new();
    for l in lessons {
        l.validate()?;
        if seen.contains(&l.id) {
            return Err(CurriculumError::InvalidLesson { id: l.id, reason: "duplicate id".into() });
        }
        seen.push(l.id);
    }
    Ok(())
}

fn exercise(mode: LessonMode, key: Key, progression: Option<Progression>, evaluation: Evaluation) -> Exercise {
    Exercise {
        mode: ModeConfig::with_mode(mode),
        progression,
        key,
        scale: None,
        content_ref: None,
        swing: SwingProfile::STRAIGHT,
        evaluation,
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Content ids the built-in lessons expect in the library.
pub const LESSON3_ACCOMPANIMENT: &str = "lesson03-accompaniment";
pub const LESSON3_QUESTIONS: &str = "lesson03-questions";
pub const LESSON5_QUESTIONS: &str = "lesson05-questions";

/// The six lessons in C.
pub fn builtin_lessons() -> Vec<LessonSpec> {
    builtin_lessons_in(PitchClass::C)
}

/// The six lessons with every key and scale rooted on `tonic`.
pub fn builtin_lessons_in(tonic: PitchClass) -> Vec<LessonSpec> {
    use Evaluation::*;
    use LessonMode::*;
    let key = Key::major(tonic);
    let ii_v_i = Some(Progression::two_five_one());
    let dorian = Scale::new(tonic, Mode::Dorian);

    let swing_roll = Exercise {
        swing: SwingProfile::default(),
        ..exercise(RollingImprov, key, ii_v_i.clone(), PressAccuracy)
    };
    let show_modes = Exercise { scale: Some(key.scale()), ..exercise(GuidedPress, key, ii_v_i.clone(), PressAccuracy) };

    let dorian_ex = |evaluation| Exercise {
        scale: Some(dorian),
        ..exercise(OnwaitRoll, key, Some(Progression::dorian_vamp()), evaluation)
    };

    let accompaniment = Exercise {
        content_ref: Some(ContentId::new(LESSON3_ACCOMPANIMENT)),
        ..exercise(RollingImprov, key, ii_v_i.clone(), RhythmMatch)
    };
    let qa3 = Exercise {
        content_ref: Some(ContentId::new(LESSON3_QUESTIONS)),
        ..exercise(RollingImprov, key, ii_v_i.clone(), QaExchange)
    };

    let mut guided_approaches = exercise(GuidedPress, key, ii_v_i.clone(), PressAccuracy);
    guided_approaches.mode.approaches_on = true;

    let qa5 = Exercise {
        content_ref: Some(ContentId::new(LESSON5_QUESTIONS)),
        scale: Some(key.scale()),
        ..exercise(ExpertPress, key, None, QaExchange)
    };
    let sequence5 = Exercise { scale: Some(key.scale()), ..exercise(ExpertPress, key, None, MotifSequence) };

    let mut free = exercise(ExpertPress, key, None, FreeImprov);
    free.mode.approaches_on = true;
    free.scale = Some(key.scale());

    vec![
        LessonSpec {
            id: 1,
            title: "Swing".into(),
            objective: "Learning modes and extensions".into(),
            tools: strings(&["Show different modes", "play modes in swing"]),
            exercises: vec![show_modes, swing_roll],
        },
        LessonSpec {
            id: 2,
            title: "Motifs".into(),
            objective: "Understand motifs".into(),
            tools: strings(&["Repeat motifs", "sequence the motifs", "learn how to form new motifs in Dorian scale"]),
            exercises: vec![dorian_ex(MotifRepeat), dorian_ex(MotifSequence), dorian_ex(PressAccuracy)],
        },
        LessonSpec {
            id: 3,
            title: "Rhythmic patterns".into(),
            objective: "Be familiar with different rhythmic patterns".into(),
            tools: strings(&["Practice with an audio accompaniement", "repeat and invent motifs", "questions and answers"]),
            exercises: vec![accompaniment, qa3],
        },
        LessonSpec {
            id: 4,
            title: "Relationship between the melody and harmony".into(),
            objective: "Learn phrases".into(),
            tools: strings(&[
                "Apply and learn a chosen chord progression",
                "learn chord tones",
                "repeat phrases over the chords",
            ]),
            exercises: vec![
                exercise(GuidedPress, key, ii_v_i.clone(), PressAccuracy),
                guided_approaches,
                exercise(GuidedPress, key, ii_v_i, MotifRepeat),
            ],
        },
        LessonSpec {
            id: 5,
            title: "Composition (Sequence, Q&A, Variation)".into(),
            objective: "Learn basic composition techniques".into(),
            tools: strings(&[
                "Repeat questions and repeat answers",
                "ask question and give your own answer",
                "apply modes and be familiar with the vocabulary",
            ]),
            exercises: vec![qa5, sequence5],
        },
        LessonSpec {
            id: 6,
            title: "Improvise (Compose in the moment)".into(),
            objective: "Apply different styles".into(),
            tools: strings(&["Apply rhythmic patterns", "use tools and all above lessons"]),
            exercises: vec![free],
        },
    ]
}

pub fn lesson_by_id(lessons: &[LessonSpec], id: u32) -> Result<&LessonSpec, CurriculumError> {
    lessons.iter().find(|l| l.id == id).ok_or(CurriculumError::NotFound(id))
}

pub fn next_exercise(lesson: &LessonSpec, progress: usize) -> Option<&Exercise> {
    lesson.exercises.get(progress)
}

/// [`next_exercise`] looked up by lesson id.
pub fn next_exercise_by_id(lessons: &[LessonSpec], id: u32, progress: usize) -> Result<Option<&Exercise>, CurriculumError> {
    Ok(next_exercise(lesson_by_id(lessons, id)?, progress))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaConfig {
    pub ppq: u32,
    pub tick_tolerance: u64,
}

impl QaConfig {
    /// Tolerance of an eighth of a beat.
    pub fn for_ppq(ppq: u32) -> Self {
        QaConfig { ppq, tick_tolerance: ppq as u64 / 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaResult {
    pub question: Motif,
    pub answer: Motif,
    pub relation: MotifRelation,
    pub rhythm_matched: bool,
}

/// Compares the first phrase of `answer_events` with `question`.
pub fn qa_exchange(question: &Motif, answer_events: &[MidiEvent], cfg: QaConfig) -> Result<QaResult, CurriculumError> {
    if !answer_events.iter().any(MidiEvent::is_note_on) {
        return Err(CurriculumError::EmptyAnswer);
    }
    let answer = segment_motifs(answer_events, Segmentation::for_ppq(cfg.ppq))
        .into_iter()
        .next()
        .ok_or(CurriculumError::AnswerTooShort)?;
    Ok(qa_compare(question, answer, cfg.tick_tolerance))
}

pub fn qa_compare(question: &Motif, answer: Motif, tick_tolerance: u64) -> QaResult {
    QaResult {
        relation: classify_variation(question, &answer, tick_tolerance),
        rhythm_matched: rhythmic_match(question, &answer, tick_tolerance),
        question: question.clone(),
        answer,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedPress {
    pub event: MidiEvent,
    pub class: PressClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_error_ms: Option<f64>,
}

impl ClassifiedPress {
    pub fn new(event: MidiEvent, outcome: PressOutcome) -> Self {
        ClassifiedPress { event, class: outcome.class, timing_error_ms: outcome.timing_error_ms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PressCounts {
    pub chord_tone_hit: u32,
    pub approach_hit: u32,
    pub progression_hit: u32,
    pub out_of_set: u32,
    pub early: u32,
    pub late: u32,
}

impl PressCounts {
    pub fn add(&mut self, class: PressClass) {
        let slot = match class {
            PressClass::ChordToneHit => &mut self.chord_tone_hit,
            PressClass::ApproachHit => &mut self.approach_hit,
            PressClass::ProgressionHit => &mut self.progression_hit,
            PressClass::OutOfSet => &mut self.out_of_set,
            PressClass::Early => &mut self.early,
            PressClass::Late => &mut self.late,
        };
        *slot += 1;
    }

    pub fn total(&self) -> u32 {
        self.chord_tone_hit + self.approach_hit + self.progression_hit + self.out_of_set + self.early + self.late
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub lesson_id: u32,
    pub counts: PressCounts,
    /// Chord-tone and approach hits as a percentage of all classified presses.
    pub accuracy_percent: f64,
    /// Set when no presses were classified (accuracy is then 0).
    pub empty: bool,
    pub mean_abs_timing_error_ms: f64,
    pub motif_results: Vec<MotifRelation>,
    pub qa_results: Vec<QaResult>,
}

pub fn score_session(
    classified: &[ClassifiedPress],
    motif_results: Vec<MotifRelation>,
    qa_results: Vec<QaResult>,
    lesson_id: u32,
) -> SessionReport {
    let mut counts = PressCounts::default();
    for press in classified {
        counts.add(press.class);
    }
    let total = counts.total();
    let accuracy_percent = if total == 0 {
        0.0
    } else {
        (counts.chord_tone_hit + counts.approach_hit) as f64 * 100.0 / total as f64
    };
    let timed: Vec<f64> = classified.iter().filter_map(|p| p.timing_error_ms).map(f64::abs).collect();
    let mean_abs_timing_error_ms = if timed.is_empty() { 0.0 } else { timed.iter().sum::<f64>() / timed.len() as f64 };
    SessionReport {
        lesson_id,
        counts,
        accuracy_percent,
        empty: total == 0,
        mean_abs_timing_error_ms,
        motif_results,
        qa_results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::Pitch;

    fn press(class: PressClass) -> ClassifiedPress {
        ClassifiedPress {
            event: MidiEvent::note_on(0, 0, Pitch::new(60).unwrap(), 90),
            class,
            timing_error_ms: None,
        }
    }

    fn notes(triples: &[(i32, u64, u64)]) -> Vec<MidiEvent> {
        triples
            .iter()
            .flat_map(|&(p, on, dur)| {
                let pitch = Pitch::new(p).unwrap();
                [MidiEvent::note_on(on, 0, pitch, 90), MidiEvent::note_off(on + dur, 0, pitch)]
            })
            .collect()
    }

    #[test]
    fn six_lessons_with_titles() {
        let lessons = builtin_lessons();
        let labels: Vec<_> = lessons.iter().map(LessonSpec::label).collect();
        assert_eq!(
            labels,
            vec![
                "01 Swing",
                "02 Motifs",
                "03 Rhythmic patterns",
                "04 Relationship between the melody and harmony",
                "05 Composition (Sequence, Q&A, Variation)",
                "06 Improvise (Compose in the moment)",
            ]
        );
        validate_lessons(&lessons).unwrap();
        assert_eq!(builtin_lessons(), lessons);
    }

    #[test]
    fn lesson_tools_and_bindings() {
        let lessons = builtin_lessons();
        let l1 = &lessons[0];
        assert!(l1.exercises.iter().any(|e| e.mode.mode == LessonMode::RollingImprov && e.swing.ratio == 2.0));
        let l2 = &lessons[1];
        assert!(l2.tools.iter().any(|t| t.contains("new motifs in Dorian scale")));
        assert!(l2.exercises.iter().all(|e| e.scale == Some(Scale::new(PitchClass::C, Mode::Dorian))));
        assert!(l2.exercises.iter().all(|e| e.mode.mode == LessonMode::OnwaitRoll));
        let l4 = &lessons[3];
        assert!(l4.exercises.iter().all(|e| e.mode.mode == LessonMode::GuidedPress));
        let l6 = &lessons[5];
        assert_eq!(l6.exercises[0].evaluation, Evaluation::FreeImprov);
        assert!(l6.tools.contains(&"use tools and all above lessons".to_string()));
        for l in &lessons {
            for e in &l.exercises {
                if e.evaluation == Evaluation::QaExchange {
                    assert!([3, 5].contains(&l.id));
                }
            }
        }
        let in_f = builtin_lessons_in(PitchClass::new(5));
        assert_eq!(in_f[1].exercises[0].scale, Some(Scale::new(PitchClass::new(5), Mode::Dorian)));
    }

    #[test]
    fn validation_catches_bad_lessons() {
        let mut lessons = builtin_lessons();
        lessons[2].exercises[1].content_ref = None;
        assert!(lessons[2].validate().is_err());
        let mut lessons = builtin_lessons();
        lessons[0].exercises[0].evaluation = Evaluation::QaExchange;
        lessons[0].exercises[0].content_ref = Some(ContentId::new("x"));
        assert!(lessons[0].validate().is_err());
        let mut lessons = builtin_lessons();
        lessons[1].id = 1;
        assert!(validate_lessons(&lessons).is_err());
        let mut lessons = builtin_lessons();
        lessons[5].exercises.clear();
        assert!(lessons[5].validate().is_err());
    }

    #[test]
    fn lesson_spec_json_round_trip() {
        let lessons = builtin_lessons();
        let json = serde_json::to_string(&lessons).unwrap();
        let back: Vec<LessonSpec> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, lessons);
    }

    #[test]
    fn exercise_sequencing() {
        let lessons = builtin_lessons();
        let l4 = &lessons[3];
        assert_eq!(next_exercise(l4, 0), Some(&l4.exercises[0]));
        assert_eq!(next_exercise(l4, l4.exercises.len()), None);
        assert_eq!(next_exercise(l4, 99), None);
        assert_eq!(next_exercise_by_id(&lessons, 7, 0), Err(CurriculumError::NotFound(7)));
    }

    #[test]
    fn qa_examples() {
        let q = Motif::from_triples(&[(60, 0, 240), (62, 240, 240), (64, 480, 480)]).unwrap();
        let cfg = QaConfig::for_ppq(480);
        let echo = qa_exchange(&q, &notes(&[(60, 1920, 240), (62, 2160, 240), (64, 2400, 480)]), cfg).unwrap();
        assert_eq!(echo.relation, MotifRelation::Repeat);
        assert!(echo.rhythm_matched);
        let new = qa_exchange(&q, &notes(&[(67, 0, 240), (65, 240, 240), (64, 480, 480)]), cfg).unwrap();
        assert_eq!(new.relation, MotifRelation::MelodicVariation);
        assert!(new.rhythm_matched);
        assert_eq!(qa_exchange(&q, &[], cfg), Err(CurriculumError::EmptyAnswer));
        assert_eq!(qa_exchange(&q, &notes(&[(60, 0, 100)]), cfg), Err(CurriculumError::AnswerTooShort));
    }

    #[test]
    fn score_examples() {
        let empty = score_session(&[], vec![], vec![], 4);
        assert!(empty.empty);
        assert_eq!(empty.accuracy_percent, 0.0);
        assert_eq!(empty.counts, PressCounts::default());

        let mixed: Vec<_> = [PressClass::ChordToneHit; 3].into_iter().chain([PressClass::OutOfSet]).map(press).collect();
        let r = score_session(&mixed, vec![], vec![], 4);
        assert_eq!(r.accuracy_percent, 75.0);
        assert_eq!(r.counts.total(), 4);
        assert!(!r.empty);

        let approach = score_session(&[press(PressClass::ApproachHit), press(PressClass::ProgressionHit)], vec![], vec![], 1);
        assert_eq!(approach.accuracy_percent, 50.0);
    }

    #[test]
    fn timing_error_averages_timed_presses_only() {
        let mut presses = vec![press(PressClass::ChordToneHit)];
        presses.push(ClassifiedPress { timing_error_ms: Some(-30.0), ..press(PressClass::ProgressionHit) });
        presses.push(ClassifiedPress { timing_error_ms: Some(150.0), ..press(PressClass::Late) });
        let r = score_session(&presses, vec![], vec![], 1);
        assert_eq!(r.mean_abs_timing_error_ms, 90.0);
    }
}
