//! Chord recognition from held notes and motif comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::midi::{EventKind, MidiEvent};
use crate::theory::{chord_tones, scale_pitch_classes, Chord, ChordQuality, Pitch, PitchClassSet, Scale};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecognitionError {
    #[error("pitch {0} is not in the scale")]
    NotDiatonic(Pitch),
    #[error("a motif needs at least two notes, got {0}")]
    TooShort(usize),
    #[error("motif onsets must be strictly increasing")]
    UnorderedOnsets,
}

/// Currently sounding notes with their onset times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HeldNotes {
    notes: Vec<(Pitch, f64)>,
}

impl HeldNotes {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pitches(pitches: impl IntoIterator<Item = Pitch>) -> Self {
        let mut held = HeldNotes::new();
        for p in pitches {
            held.press(p, 0.0);
        }
        held
    }

    /// Re-pressing a held pitch keeps the original onset.
    pub fn press(&mut self, pitch: Pitch, onset_ms: f64) {
        if !self.notes.iter().any(|&(p, _)| p == pitch) {
            self.notes.push((pitch, onset_ms));
        }
    }

    pub fn release(&mut self, pitch: Pitch) {
        self.notes.retain(|&(p, _)| p != pitch);
    }

    pub fn clear(&mut self) {
        self.notes.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pitch, f64)> + '_ {
        self.notes.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    pub fn pitch_classes(&self) -> PitchClassSet {
        self.notes.iter().map(|(p, _)| p.pitch_class()).collect()
    }

    pub fn lowest(&self) -> Option<Pitch> {
        self.notes.iter().map(|&(p, _)| p).min()
    }

    /// Copy restricted to pitches strictly below `split`.
    pub fn below(&self, split: Pitch) -> HeldNotes {
        HeldNotes { notes: self.notes.iter().copied().filter(|&(p, _)| p < split).collect() }
    }
}

/// Matches pitch-class sets against a vocabulary of chord qualities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChordRecognizer {
    qualities: Vec<ChordQuality>,
}

impl Default for ChordRecognizer {
    fn default() -> Self {
        ChordRecognizer { qualities: ChordQuality::ALL.to_vec() }
    }
}

impl ChordRecognizer {
    pub fn with_qualities(qualities: impl IntoIterator<Item = ChordQuality>) -> Self {
        ChordRecognizer { qualities: qualities.into_iter().collect() }
    }

    /// Every chord in the vocabulary whose tones equal `set`, by ascending root.
    pub fn candidates(&self, set: PitchClassSet) -> Vec<Chord> {
        let mut out = Vec::new();
        for root in set.iter() {
            for &q in &self.qualities {
                let c = Chord::new(root, q);
                if chord_tones(c) == set {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn recognize(&self, held: &HeldNotes) -> Option<Chord> {
        let set = held.pitch_classes();
        if set.len() < 3 {
            return None;
        }
        let candidates = self.candidates(set);
        match candidates.as_slice() {
            [] => None,
            [only] => Some(*only),
            many => {
                let bass = held.lowest()?.pitch_class();
                many.iter().find(|c| c.root == bass).or_else(|| many.first()).copied()
            }
        }
    }
}

/// Recognizes a chord over the full nine-quality vocabulary. Inversions and
/// doublings are irrelevant; shared sets resolve to the bass note's root.
pub fn recognize_chord(held: &HeldNotes) -> Option<Chord> {
    ChordRecognizer::default().recognize(held)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MotifNote {
    pub pitch: Pitch,
    pub onset_tick: u64,
    pub duration_ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<MotifNote>", into = "Vec<MotifNote>")]
pub struct Motif {
    notes: Vec<MotifNote>,
}

impl Motif {
    pub fn new(notes: Vec<MotifNote>) -> Result<Self, RecognitionError> {
        if notes.len() < 2 {
            return Err(RecognitionError::TooShort(notes.len()));
        }
        if notes.windows(2).any(|w| w[0].onset_tick >= w[1].onset_tick) {
            return Err(RecognitionError::UnorderedOnsets);
        }
        Ok(Motif { notes })
    }

    /// Builds a motif from `(pitch, onset, duration)` triples.
    pub fn from_triples(triples: &[(u8, u64, u64)]) -> Result<Self, RecognitionError> {
        Motif::new(
            triples
                .iter()
                .map(|&(p, onset_tick, duration_ticks)| MotifNote {
                    pitch: Pitch::new(p as i32).expect("u8 pitch out of MIDI range"),
                    onset_tick,
                    duration_ticks,
                })
                .collect(),
        )
    }

    pub fn notes(&self) -> &[MotifNote] {
        &self.notes
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    pub fn pitches(&self) -> impl Iterator<Item = Pitch> + '_ {
        self.notes.iter().map(|n| n.pitch)
    }

    fn relative_onsets(&self) -> impl Iterator<Item = u64> + '_ {
        let first = self.notes[0].onset_tick;
        self.notes.iter().map(move |n| n.onset_tick - first)
    }

    fn inter_onset_intervals(&self) -> impl Iterator<Item = u64> + '_ {
        self.notes.windows(2).map(|w| w[1].onset_tick - w[0].onset_tick)
    }

    /// Same motif moved by `ticks`.
    pub fn shifted(&self, ticks: u64) -> Motif {
        Motif {
            notes: self.notes.iter().map(|n| MotifNote { onset_tick: n.onset_tick + ticks, ..*n }).collect(),
        }
    }
}

impl TryFrom<Vec<MotifNote>> for Motif {
    type Error = RecognitionError;
    fn try_from(notes: Vec<MotifNote>) -> Result<Self, Self::Error> {
        Motif::new(notes)
    }
}

impl From<Motif> for Vec<MotifNote> {
    fn from(m: Motif) -> Self {
        m.notes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MotifRelation {
    Repeat,
    Sequence { shift_degrees: i32 },
    RhythmicVariation,
    MelodicVariation,
    Unrelated,
}

fn within(a: u64, b: u64, tol: u64) -> bool {
    a.abs_diff(b) <= tol
}

/// Onsets (after aligning the first) and durations agree within `tol`.
fn rhythm_equal(a: &Motif, b: &Motif, tol: u64) -> bool {
    a.len() == b.len()
        && a.relative_onsets().zip(b.relative_onsets()).all(|(x, y)| within(x, y, tol))
        && a.notes.iter().zip(&b.notes).all(|(x, y)| within(x.duration_ticks, y.duration_ticks, tol))
}

fn pitches_equal(a: &Motif, b: &Motif) -> bool {
    a.len() == b.len() && a.pitches().eq(b.pitches())
}

pub fn is_repeat(a: &Motif, b: &Motif, tick_tolerance: u64) -> bool {
    pitches_equal(a, b) && rhythm_equal(a, b, tick_tolerance)
}

/// Diatonic position counted in scale steps from the scale tonic in octave -1.
fn diatonic_index(scale: Scale, pitch: Pitch) -> Option<i32> {
    let degree = scale.degree_of(pitch.pitch_class())? as i32;
    let above_tonic = pitch.number() as i32 - scale.tonic.value() as i32;
    Some(above_tonic.div_euclid(12) * 7 + degree)
}

fn pitch_at_index(scale: Scale, index: i32) -> Option<Pitch> {
    let pcs = scale_pitch_classes(scale);
    let octave = index.div_euclid(7);
    let degree = index.rem_euclid(7) as usize;
    let offset = scale.tonic.interval_to(pcs[degree]) as i32;
    Pitch::new(scale.tonic.value() as i32 + octave * 12 + offset).ok()
}

/// Moves a pitch by `steps` scale degrees.
pub fn diatonic_shift(scale: Scale, pitch: Pitch, steps: i32) -> Result<Option<Pitch>, RecognitionError> {
    let index = diatonic_index(scale, pitch).ok_or(RecognitionError::NotDiatonic(pitch))?;
    Ok(pitch_at_index(scale, index + steps))
}

/// Returns the nonzero shift in `-7..=7` scale degrees that maps `a` onto
/// `b` with matching rhythm, if any.
pub fn is_sequence(a: &Motif, b: &Motif, scale: Scale, tick_tolerance: u64) -> Result<Option<i32>, RecognitionError> {
    let index = |p: Pitch| diatonic_index(scale, p).ok_or(RecognitionError::NotDiatonic(p));
    let ia = a.pitches().map(index).collect::<Result<Vec<_>, _>>()?;
    let ib = b.pitches().map(index).collect::<Result<Vec<_>, _>>()?;
    if ia.len() != ib.len() || !rhythm_equal(a, b, tick_tolerance) {
        return Ok(None);
    }
    let shift = ib[0] - ia[0];
    if shift == 0 || !(-7..=7).contains(&shift) {
        return Ok(None);
    }
    Ok(ia.iter().zip(&ib).all(|(x, y)| y - x == shift).then_some(shift))
}

pub fn classify_variation(a: &Motif, b: &Motif, tick_tolerance: u64) -> MotifRelation {
    if is_repeat(a, b, tick_tolerance) {
        MotifRelation::Repeat
    } else if pitches_equal(a, b) {
        MotifRelation::RhythmicVariation
    } else if rhythm_equal(a, b, tick_tolerance) {
        MotifRelation::MelodicVariation
    } else {
        MotifRelation::Unrelated
    }
}

/// Same note count and inter-onset intervals within tolerance; pitches ignored.
pub fn rhythmic_match(a: &Motif, b: &Motif, tick_tolerance: u64) -> bool {
    a.len() == b.len()
        && a.inter_onset_intervals().zip(b.inter_onset_intervals()).all(|(x, y)| within(x, y, tick_tolerance))
}

/// Phrase boundaries for a live stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    /// A rest at least this long (note end to next onset) closes a motif.
    pub rest_ticks: u64,
    pub max_notes: usize,
}

impl Segmentation {
    /// Rest of one beat, at most 16 notes.
    pub fn for_ppq(ppq: u32) -> Self {
        Segmentation { rest_ticks: ppq as u64, max_notes: 16 }
    }
}

/// Pairs note-ons with their note-offs; simultaneous onsets keep the highest pitch.
pub fn melody_notes(events: &[MidiEvent]) -> Vec<MotifNote> {
    let mut notes: Vec<MotifNote> = Vec::new();
    let mut pending: Vec<(usize, Pitch)> = Vec::new();
    for e in events {
        match e.kind {
            EventKind::NoteOn { pitch, .. } => {
                pending.push((notes.len(), pitch));
                notes.push(MotifNote { pitch, onset_tick: e.tick, duration_ticks: 0 });
            }
            EventKind::NoteOff { pitch, .. } => {
                if let Some(i) = pending.iter().position(|&(_, p)| p == pitch) {
                    let (idx, _) = pending.remove(i);
                    notes[idx].duration_ticks = e.tick - notes[idx].onset_tick;
                }
            }
            _ => {}
        }
    }
    // unterminated notes ring until the next onset, or one tick
    for (idx, _) in pending {
        let next = notes.iter().map(|n| n.onset_tick).filter(|&t| t > notes[idx].onset_tick).min();
        notes[idx].duration_ticks = next.map_or(1, |t| t - notes[idx].onset_tick);
    }
    notes.sort_by(|a, b| a.onset_tick.cmp(&b.onset_tick).then(b.pitch.cmp(&a.pitch)));
    notes.dedup_by_key(|n| n.onset_tick);
    for n in &mut notes {
        n.duration_ticks = n.duration_ticks.max(1);
    }
    notes
}

/// Splits a performance into motifs; single-note fragments are dropped.
pub fn segment_motifs(events: &[MidiEvent], rule: Segmentation) -> Vec<Motif> {
    let mut out = Vec::new();
    let mut current: Vec<MotifNote> = Vec::new();
    for note in melody_notes(events) {
        if let Some(last) = current.last() {
            let end = last.onset_tick + last.duration_ticks;
            let rest = note.onset_tick.saturating_sub(end);
            if rest >= rule.rest_ticks || current.len() >= rule.max_notes {
                if let Ok(m) = Motif::new(std::mem::take(&mut current)) {
                    out.push(m);
                }
            }
        }
        current.push(note);
    }
    if let Ok(m) = Motif::new(current) {
        out.push(m);
    }
    out
}
