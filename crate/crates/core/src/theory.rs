//! Pitch-class harmony: chords, diatonic modes, keys, progressions and
//! approach-note sets.
//!
//! Everything in here is a pure function over small `Copy` values.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("invalid progression: {0}")]
    InvalidProgression(String),
    #[error("no chord-scale mapping for {0}")]
    NoChordScale(Chord),
    #[error("MIDI pitch {0} out of range 0..=127")]
    PitchRange(i32),
    #[error("unknown {kind} name {name:?}")]
    UnknownName { kind: &'static str, name: String },
}

const NAMES: [&str; 12] = ["C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"];

/// A pitch class, `C = 0` through `B = 11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "i32", into = "u8")]
pub struct PitchClass(u8);

impl PitchClass {
    pub const C: PitchClass = PitchClass(0);

    /// Reduces any integer modulo 12.
    pub fn new(value: i32) -> Self {
        PitchClass(value.rem_euclid(12) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn transpose(self, semitones: i32) -> Self {
        PitchClass::new(self.0 as i32 + semitones)
    }

    /// Upward distance in semitones from `self` to `other`, in `0..12`.
    pub fn interval_to(self, other: PitchClass) -> u8 {
        (other.0 + 12 - self.0) % 12
    }

    pub fn name(self) -> &'static str {
        NAMES[self.0 as usize]
    }

    pub fn parse(name: &str) -> Result<Self, TheoryError> {
        let unknown = || TheoryError::UnknownName { kind: "pitch class", name: name.to_string() };
        let mut chars = name.trim().chars();
        let letter = chars.next().ok_or_else(unknown)?;
        let base = match letter.to_ascii_uppercase() {
            'C' => 0,
            'D' => 2,
            'E' => 4,
            'F' => 5,
            'G' => 7,
            'A' => 9,
            'B' => 11,
            _ => return Err(unknown()),
        };
        let mut offset = 0;
        for c in chars {
            match c {
                '#' | '♯' => offset += 1,
                'b' | '♭' => offset -= 1,
                _ => return Err(unknown()),
            }
        }
        Ok(PitchClass::new(base + offset))
    }
}

impl From<i32> for PitchClass {
    fn from(value: i32) -> Self {
        PitchClass::new(value)
    }
}

impl From<PitchClass> for u8 {
    fn from(pc: PitchClass) -> u8 {
        pc.0
    }
}

impl fmt::Display for PitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A MIDI note number in `0..=127`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "u8")]
pub struct Pitch(u8);

impl Pitch {
    pub const MIDDLE_C: Pitch = Pitch(60);

    pub fn new(number: i32) -> Result<Self, TheoryError> {
        if (0..=127).contains(&number) {
            Ok(Pitch(number as u8))
        } else {
            Err(TheoryError::PitchRange(number))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn pitch_class(self) -> PitchClass {
        PitchClass::new(self.0 as i32)
    }

    /// Scientific octave number; MIDI 60 is C4.
    pub fn octave(self) -> i32 {
        self.0 as i32 / 12 - 1
    }
}

impl TryFrom<i32> for Pitch {
    type Error = TheoryError;
    fn try_from(value: i32) -> Result<Self, Self::Error> {
        Pitch::new(value)
    }
}

impl From<Pitch> for u8 {
    fn from(p: Pitch) -> u8 {
        p.0
    }
}

impl fmt::Display for Pitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.pitch_class(), self.octave())
    }
}

/// A set of pitch classes stored as a 12-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PitchClassSet(u16);

impl PitchClassSet {
    pub const EMPTY: PitchClassSet = PitchClassSet(0);

    pub fn from_mask(mask: u16) -> Self {
        PitchClassSet(mask & 0x0fff)
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn insert(&mut self, pc: PitchClass) {
        self.0 |= 1 << pc.0;
    }

    pub fn remove(&mut self, pc: PitchClass) {
        self.0 &= !(1 << pc.0);
    }

    pub fn contains(self, pc: PitchClass) -> bool {
        self.0 & (1 << pc.0) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: PitchClassSet) -> PitchClassSet {
        PitchClassSet(self.0 | other.0)
    }

    pub fn intersection(self, other: PitchClassSet) -> PitchClassSet {
        PitchClassSet(self.0 & other.0)
    }

    pub fn difference(self, other: PitchClassSet) -> PitchClassSet {
        PitchClassSet(self.0 & !other.0)
    }

    /// Ascending from C.
    pub fn iter(self) -> impl Iterator<Item = PitchClass> {
        (0..12).filter(move |i| self.0 & (1 << i) != 0).map(|i| PitchClass(i as u8))
    }
}

impl FromIterator<PitchClass> for PitchClassSet {
    fn from_iter<I: IntoIterator<Item = PitchClass>>(iter: I) -> Self {
        let mut set = PitchClassSet::EMPTY;
        for pc in iter {
            set.insert(pc);
        }
        set
    }
}

impl Serialize for PitchClassSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|pc| pc.0))
    }
}

impl<'de> Deserialize<'de> for PitchClassSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let values = Vec::<i32>::deserialize(d)?;
        Ok(values.into_iter().map(PitchClass::new).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChordQuality {
    Maj7,
    Min7,
    Dom7,
    Min7b5,
    Dim7,
    Maj6,
    Min6,
    TriadMaj,
    TriadMin,
}

impl ChordQuality {
    pub const ALL: [ChordQuality; 9] = [
        ChordQuality::Maj7,
        ChordQuality::Min7,
        ChordQuality::Dom7,
        ChordQuality::Min7b5,
        ChordQuality::Dim7,
        ChordQuality::Maj6,
        ChordQuality::Min6,
        ChordQuality::TriadMaj,
        ChordQuality::TriadMin,
    ];

    /// Semitone offsets above the root, ascending, starting at 0.
    pub fn template(self) -> &'static [u8] {
        match self {
            ChordQuality::Maj7 => &[0, 4, 7, 11],
            ChordQuality::Min7 => &[0, 3, 7, 10],
            ChordQuality::Dom7 => &[0, 4, 7, 10],
            ChordQuality::Min7b5 => &[0, 3, 6, 10],
            ChordQuality::Dim7 => &[0, 3, 6, 9],
            ChordQuality::Maj6 => &[0, 4, 7, 9],
            ChordQuality::Min6 => &[0, 3, 7, 9],
            ChordQuality::TriadMaj => &[0, 4, 7],
            ChordQuality::TriadMin => &[0, 3, 7],
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ChordQuality::Maj7 => "maj7",
            ChordQuality::Min7 => "m7",
            ChordQuality::Dom7 => "7",
            ChordQuality::Min7b5 => "m7b5",
            ChordQuality::Dim7 => "dim7",
            ChordQuality::Maj6 => "6",
            ChordQuality::Min6 => "m6",
            ChordQuality::TriadMaj => "",
            ChordQuality::TriadMin => "m",
        }
    }

    pub fn parse(name: &str) -> Result<Self, TheoryError> {
        Ok(match name {
            "maj7" => ChordQuality::Maj7,
            "min7" | "m7" => ChordQuality::Min7,
            "dom7" | "7" => ChordQuality::Dom7,
            "min7b5" | "m7b5" => ChordQuality::Min7b5,
            "dim7" => ChordQuality::Dim7,
            "maj6" | "6" => ChordQuality::Maj6,
            "min6" | "m6" => ChordQuality::Min6,
            "triad_maj" | "maj" => ChordQuality::TriadMaj,
            "triad_min" | "min" | "m" => ChordQuality::TriadMin,
            _ => return Err(TheoryError::UnknownName { kind: "chord quality", name: name.to_string() }),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Chord {
    pub root: PitchClass,
    pub quality: ChordQuality,
}

impl Chord {
    pub fn new(root: PitchClass, quality: ChordQuality) -> Self {
        Chord { root, quality }
    }
}

impl fmt::Display for Chord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.root, self.quality.symbol())
    }
}

pub fn chord_tones(chord: Chord) -> PitchClassSet {
    chord.quality.template().iter().map(|&o| chord.root.transpose(o as i32)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Ionian,
    Dorian,
    Phrygian,
    Lydian,
    Mixolydian,
    Aeolian,
    Locrian,
}

const IONIAN_STEPS: [u8; 7] = [2, 2, 1, 2, 2, 2, 1];

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Ionian,
        Mode::Dorian,
        Mode::Phrygian,
        Mode::Lydian,
        Mode::Mixolydian,
        Mode::Aeolian,
        Mode::Locrian,
    ];

    /// Position of this mode's tonic within its parent major scale, 0-based.
    pub fn degree(self) -> usize {
        self as usize
    }

    /// Interval pattern of the mode in semitone steps.
    pub fn steps(self) -> [u8; 7] {
        let mut steps = IONIAN_STEPS;
        steps.rotate_left(self.degree());
        steps
    }

    /// Semitones from the parent major tonic up to this mode's tonic.
    pub fn offset_from_parent(self) -> u8 {
        IONIAN_STEPS[..self.degree()].iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scale {
    pub tonic: PitchClass,
    pub mode: Mode,
}

impl Scale {
    pub fn new(tonic: PitchClass, mode: Mode) -> Self {
        Scale { tonic, mode }
    }

    /// The ionian tonic whose rotation yields this scale.
    pub fn parent_tonic(self) -> PitchClass {
        self.tonic.transpose(-(self.mode.offset_from_parent() as i32))
    }

    pub fn pitch_class_set(self) -> PitchClassSet {
        scale_pitch_classes(self).into_iter().collect()
    }

    pub fn contains(self, pc: PitchClass) -> bool {
        self.pitch_class_set().contains(pc)
    }

    /// Index of `pc` within the ordered scale, if diatonic.
    pub fn degree_of(self, pc: PitchClass) -> Option<usize> {
        scale_pitch_classes(self).iter().position(|&p| p == pc)
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.tonic, self.mode)
    }
}

/// Seven pitch classes starting at the tonic.
pub fn scale_pitch_classes(scale: Scale) -> [PitchClass; 7] {
    let mut out = [scale.tonic; 7];
    let mut acc = 0i32;
    for (slot, step) in out.iter_mut().zip(scale.mode.steps()) {
        *slot = scale.tonic.transpose(acc);
        acc += step as i32;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tonality {
    Major,
    Minor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Key {
    pub tonic: PitchClass,
    pub tonality: Tonality,
}

impl Key {
    pub fn major(tonic: PitchClass) -> Self {
        Key { tonic, tonality: Tonality::Major }
    }

    pub fn minor(tonic: PitchClass) -> Self {
        Key { tonic, tonality: Tonality::Minor }
    }

    /// Major keys use ionian, minor keys natural minor.
    pub fn scale(self) -> Scale {
        let mode = match self.tonality {
            Tonality::Major => Mode::Ionian,
            Tonality::Minor => Mode::Aeolian,
        };
        Scale::new(self.tonic, mode)
    }

    /// Pitch class of a 1-based scale degree.
    pub fn degree_root(self, degree: u8) -> Result<PitchClass, TheoryError> {
        if !(1..=7).contains(&degree) {
            return Err(TheoryError::InvalidProgression(format!("degree {degree} outside 1..=7")));
        }
        Ok(scale_pitch_classes(self.scale())[degree as usize - 1])
    }

    /// Parses strings like `"C major"`, `"Eb minor"` or `"F#"` (major).
    pub fn parse(text: &str) -> Result<Self, TheoryError> {
        let mut parts = text.split_whitespace();
        let tonic = PitchClass::parse(parts.next().unwrap_or(""))?;
        let tonality = match parts.next().map(|s| s.to_ascii_lowercase()) {
            None => Tonality::Major,
            Some(s) if s == "major" || s == "maj" => Tonality::Major,
            Some(s) if s == "minor" || s == "min" => Tonality::Minor,
            Some(s) => return Err(TheoryError::UnknownName { kind: "tonality", name: s }),
        };
        Ok(Key { tonic, tonality })
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.tonality {
            Tonality::Major => "major",
            Tonality::Minor => "minor",
        };
        write!(f, "{} {}", self.tonic, t)
    }
}

/// A positive number of beats as a fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Beats {
    pub num: u32,
    pub den: u32,
}

impl Beats {
    pub const fn whole(n: u32) -> Self {
        Beats { num: n, den: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProgressionStep {
    /// 1-based scale degree.
    pub degree: u8,
    pub quality: ChordQuality,
    pub duration_beats: Beats,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Progression {
    pub name: String,
    pub steps: Vec<ProgressionStep>,
}

/// Default chord length: one bar of 4/4.
pub const DEFAULT_STEP_BEATS: Beats = Beats::whole(4);

impl Progression {
    fn from_steps(name: &str, steps: &[(u8, ChordQuality)], beats: Beats) -> Self {
        Progression {
            name: name.to_string(),
            steps: steps
                .iter()
                .map(|&(degree, quality)| ProgressionStep { degree, quality, duration_beats: beats })
                .collect(),
        }
    }

    /// Major ii-V-I.
    pub fn two_five_one() -> Self {
        Self::two_five_one_with(DEFAULT_STEP_BEATS)
    }

    pub fn two_five_one_with(beats: Beats) -> Self {
        use ChordQuality::*;
        Self::from_steps("two_five_one", &[(2, Min7), (5, Dom7), (1, Maj7)], beats)
    }

    /// ii-V-I followed by a dominant VI turnaround.
    pub fn two_five_one_six() -> Self {
        use ChordQuality::*;
        Self::from_steps(
            "two_five_one_six",
            &[(2, Min7), (5, Dom7), (1, Maj7), (6, Dom7)],
            DEFAULT_STEP_BEATS,
        )
    }

    /// Minor ii-V-i, to be realized in a minor key.
    pub fn minor_two_five_one() -> Self {
        use ChordQuality::*;
        Self::from_steps("minor_two_five_one", &[(2, Min7b5), (5, Dom7), (1, Min7)], DEFAULT_STEP_BEATS)
    }

    /// One-chord min7 vamp on the tonic (pairs with dorian).
    pub fn dorian_vamp() -> Self {
        Self::from_steps("dorian_vamp", &[(1, ChordQuality::Min7)], DEFAULT_STEP_BEATS)
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "two_five_one" => Some(Self::two_five_one()),
            "two_five_one_six" => Some(Self::two_five_one_six()),
            "minor_two_five_one" => Some(Self::minor_two_five_one()),
            "dorian_vamp" => Some(Self::dorian_vamp()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimedChord {
    pub chord: Chord,
    pub start_tick: u64,
    pub duration_ticks: u64,
}

impl TimedChord {
    pub fn end_tick(&self) -> u64 {
        self.start_tick + self.duration_ticks
    }

    pub fn contains(&self, tick: u64) -> bool {
        tick >= self.start_tick && tick < self.end_tick()
    }
}

/// Lays the progression out on the tick grid, contiguous from tick 0.
pub fn realize_progression(p: &Progression, key: Key, ppq: u32) -> Result<Vec<TimedChord>, TheoryError> {
    if ppq == 0 {
        return Err(TheoryError::InvalidProgression("ppq must be positive".into()));
    }
    if p.steps.is_empty() {
        return Err(TheoryError::InvalidProgression(format!("{} has no steps", p.name)));
    }
    let mut tick = 0u64;
    let mut out = Vec::with_capacity(p.steps.len());
    for step in &p.steps {
        let root = key.degree_root(step.degree)?;
        let Beats { num, den } = step.duration_beats;
        if num == 0 || den == 0 {
            return Err(TheoryError::InvalidProgression(format!("degree {}: duration must be > 0", step.degree)));
        }
        let scaled = num as u64 * ppq as u64;
        if scaled % den as u64 != 0 {
            return Err(TheoryError::InvalidProgression(format!(
                "{num}/{den} beats is not a whole number of ticks at ppq {ppq}"
            )));
        }
        let duration_ticks = scaled / den as u64;
        out.push(TimedChord { chord: Chord::new(root, step.quality), start_tick: tick, duration_ticks });
        tick += duration_ticks;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfStepDirection {
    #[default]
    Below,
    Above,
}

/// Chromatic approach tones one semitone below each chord tone, minus chord tones.
pub fn half_step_approaches(chord: Chord) -> PitchClassSet {
    half_step_approaches_from(chord, HalfStepDirection::Below)
}

pub fn half_step_approaches_from(chord: Chord, direction: HalfStepDirection) -> PitchClassSet {
    let shift = match direction {
        HalfStepDirection::Below => -1,
        HalfStepDirection::Above => 1,
    };
    let tones = chord_tones(chord);
    tones.iter().map(|t| t.transpose(shift)).collect::<PitchClassSet>().difference(tones)
}

/// For each chord tone, the nearest scale tone strictly above it; chord tones removed.
pub fn scale_above_approaches(chord: Chord, scale: Scale) -> PitchClassSet {
    let tones = chord_tones(chord);
    let members = scale.pitch_class_set();
    let mut out = PitchClassSet::EMPTY;
    for t in tones.iter() {
        if let Some(above) = (1..12).map(|d| t.transpose(d)).find(|&pc| members.contains(pc)) {
            out.insert(above);
        }
    }
    out.difference(tones)
}

/// Quality-to-mode lookup for chord-scale pairing. Extendable at runtime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChordScaleTable {
    entries: BTreeMap<ChordQuality, Mode>,
}

impl Default for ChordScaleTable {
    fn default() -> Self {
        let entries = [
            (ChordQuality::Min7, Mode::Dorian),
            (ChordQuality::Dom7, Mode::Mixolydian),
            (ChordQuality::Maj7, Mode::Ionian),
            (ChordQuality::Min7b5, Mode::Locrian),
        ]
        .into_iter()
        .collect();
        ChordScaleTable { entries }
    }
}

impl ChordScaleTable {
    pub fn insert(&mut self, quality: ChordQuality, mode: Mode) {
        self.entries.insert(quality, mode);
    }

    pub fn lookup(&self, chord: Chord, _key: Key) -> Result<Scale, TheoryError> {
        self.entries
            .get(&chord.quality)
            .map(|&mode| Scale::new(chord.root, mode))
            .ok_or(TheoryError::NoChordScale(chord))
    }
}

pub fn chord_scale(chord: Chord, key: Key) -> Result<Scale, TheoryError> {
    ChordScaleTable::default().lookup(chord, key)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pcs(values: &[i32]) -> PitchClassSet {
        values.iter().map(|&v| PitchClass::new(v)).collect()
    }

    fn chord(root: i32, q: ChordQuality) -> Chord {
        Chord::new(PitchClass::new(root), q)
    }

    #[test]
    fn chord_tone_examples() {
        assert_eq!(chord_tones(chord(2, ChordQuality::Min7)), pcs(&[2, 5, 9, 0]));
        assert_eq!(chord_tones(chord(0, ChordQuality::Maj7)), pcs(&[0, 4, 7, 11]));
        assert_eq!(chord_tones(chord(7, ChordQuality::Dom7)), pcs(&[7, 11, 2, 5]));
    }

    #[test]
    fn templates_are_well_formed_and_distinct() {
        let mut seen = Vec::new();
        for q in ChordQuality::ALL {
            let t = q.template();
            assert_eq!(t[0], 0);
            assert!(t.windows(2).all(|w| w[0] < w[1]));
            assert!(t.iter().all(|&o| o < 12));
            let set = chord_tones(Chord::new(PitchClass::C, q));
            assert!(!seen.contains(&set), "{q:?} duplicates another template");
            seen.push(set);
        }
    }

    #[test]
    fn pitch_class_wraps() {
        assert_eq!(PitchClass::new(-1).value(), 11);
        assert_eq!(PitchClass::new(25).value(), 1);
        assert_eq!(PitchClass::parse("Bb").unwrap().value(), 10);
        assert_eq!(PitchClass::parse("C#").unwrap().value(), 1);
        assert!(PitchClass::parse("H").is_err());
    }

    #[test]
    fn pitch_octave() {
        let p = Pitch::new(60).unwrap();
        assert_eq!(p.octave(), 4);
        assert_eq!(p.pitch_class(), PitchClass::C);
        assert_eq!(Pitch::new(21).unwrap().octave(), 0);
        assert!(Pitch::new(128).is_err());
        assert!(Pitch::new(-1).is_err());
    }

    #[test]
    fn realize_ii_v_i_in_c() {
        let r = realize_progression(&Progression::two_five_one(), Key::major(PitchClass::C), 480).unwrap();
        assert_eq!(
            r,
            vec![
                TimedChord { chord: chord(2, ChordQuality::Min7), start_tick: 0, duration_ticks: 1920 },
                TimedChord { chord: chord(7, ChordQuality::Dom7), start_tick: 1920, duration_ticks: 1920 },
                TimedChord { chord: chord(0, ChordQuality::Maj7), start_tick: 3840, duration_ticks: 1920 },
            ]
        );
        let r6 = realize_progression(&Progression::two_five_one_six(), Key::major(PitchClass::C), 480).unwrap();
        assert_eq!(
            r6[3],
            TimedChord { chord: chord(9, ChordQuality::Dom7), start_tick: 5760, duration_ticks: 1920 }
        );
    }

    #[test]
    fn realize_one_tick_steps() {
        let p = Progression::two_five_one_with(Beats::whole(1));
        let r = realize_progression(&p, Key::major(PitchClass::C), 1).unwrap();
        assert!(r.iter().all(|c| c.duration_ticks == 1));
        assert_eq!(r.iter().map(|c| c.start_tick).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn realize_rejects_bad_degree_and_duration() {
        let mut p = Progression::two_five_one();
        p.steps[0].degree = 8;
        assert!(matches!(
            realize_progression(&p, Key::major(PitchClass::C), 480),
            Err(TheoryError::InvalidProgression(_))
        ));
        let mut p = Progression::two_five_one();
        p.steps[1].duration_beats = Beats { num: 1, den: 3 };
        assert!(realize_progression(&p, Key::major(PitchClass::C), 1).is_err());
        assert!(realize_progression(&Progression::two_five_one(), Key::major(PitchClass::C), 0).is_err());
        let empty = Progression { name: "empty".into(), steps: vec![] };
        assert!(realize_progression(&empty, Key::major(PitchClass::C), 480).is_err());
    }

    #[test]
    fn minor_ii_v_i() {
        let r = realize_progression(&Progression::minor_two_five_one(), Key::minor(PitchClass::C), 480).unwrap();
        let chords: Vec<_> = r.iter().map(|t| t.chord).collect();
        assert_eq!(
            chords,
            vec![chord(2, ChordQuality::Min7b5), chord(7, ChordQuality::Dom7), chord(0, ChordQuality::Min7)]
        );
    }

    #[test]
    fn half_step_examples() {
        assert_eq!(half_step_approaches(chord(0, ChordQuality::Maj7)), pcs(&[3, 6, 10]));
        assert_eq!(half_step_approaches(chord(2, ChordQuality::Min7)), pcs(&[1, 4, 8, 11]));
        assert_eq!(half_step_approaches(chord(0, ChordQuality::Dim7)), pcs(&[11, 2, 5, 8]));
        // above: C E G B -> C# F G# C, minus chord tones
        assert_eq!(
            half_step_approaches_from(chord(0, ChordQuality::Maj7), HalfStepDirection::Above),
            pcs(&[1, 5, 8])
        );
    }

    #[test]
    fn chord_scale_examples() {
        let c = Key::major(PitchClass::C);
        assert_eq!(chord_scale(chord(2, ChordQuality::Min7), c).unwrap(), Scale::new(PitchClass::new(2), Mode::Dorian));
        assert_eq!(
            chord_scale(chord(7, ChordQuality::Dom7), c).unwrap(),
            Scale::new(PitchClass::new(7), Mode::Mixolydian)
        );
        assert_eq!(chord_scale(chord(0, ChordQuality::Maj7), c).unwrap(), Scale::new(PitchClass::C, Mode::Ionian));
        assert_eq!(
            chord_scale(chord(0, ChordQuality::Dim7), c),
            Err(TheoryError::NoChordScale(chord(0, ChordQuality::Dim7)))
        );
        let mut table = ChordScaleTable::default();
        table.insert(ChordQuality::Min6, Mode::Dorian);
        assert!(table.lookup(chord(0, ChordQuality::Min6), c).is_ok());
    }

    #[test]
    fn scale_above_examples() {
        let ionian = Scale::new(PitchClass::C, Mode::Ionian);
        assert_eq!(scale_above_approaches(chord(0, ChordQuality::Maj7), ionian), pcs(&[2, 5, 9]));
        let d_dorian = Scale::new(PitchClass::new(2), Mode::Dorian);
        assert_eq!(scale_above_approaches(chord(2, ChordQuality::Min7), d_dorian), pcs(&[4, 7, 11]));
        let g_mixo = Scale::new(PitchClass::new(7), Mode::Mixolydian);
        assert_eq!(scale_above_approaches(chord(7, ChordQuality::Dom7), g_mixo), pcs(&[9, 0, 4]));
    }

    #[test]
    fn scale_examples() {
        let v = |s: Scale| scale_pitch_classes(s).iter().map(|p| p.value()).collect::<Vec<_>>();
        assert_eq!(v(Scale::new(PitchClass::C, Mode::Ionian)), vec![0, 2, 4, 5, 7, 9, 11]);
        assert_eq!(v(Scale::new(PitchClass::new(2), Mode::Dorian)), vec![2, 4, 5, 7, 9, 11, 0]);
        assert_eq!(v(Scale::new(PitchClass::C, Mode::Dorian)), vec![0, 2, 3, 5, 7, 9, 10]);
        assert_eq!(Scale::new(PitchClass::C, Mode::Dorian).parent_tonic(), PitchClass::new(10));
    }

    #[test]
    fn key_parse_roundtrip() {
        assert_eq!(Key::parse("C major").unwrap(), Key::major(PitchClass::C));
        assert_eq!(Key::parse("Eb minor").unwrap(), Key::minor(PitchClass::new(3)));
        assert_eq!(Key::parse("F#").unwrap(), Key::major(PitchClass::new(6)));
        assert!(Key::parse("C dorian").is_err());
        let k = Key::minor(PitchClass::new(9));
        assert_eq!(Key::parse(&k.to_string()).unwrap(), k);
    }

    #[test]
    fn pcset_serde() {
        let s = pcs(&[0, 4, 7]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[0,4,7]");
        assert_eq!(serde_json::from_str::<PitchClassSet>(&json).unwrap(), s);
    }
}
