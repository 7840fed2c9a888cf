//! Musical transport, metronome and swing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClockError {
    #[error("bar count must be at least 1")]
    NoBars,
    #[error("tempo must be positive and finite, got {0}")]
    BadTempo(f64),
    #[error("swing ratio must be within 1.0..=3.0, got {0}")]
    BadSwing(f64),
    #[error("invalid time signature {0}/{1}")]
    BadTimeSignature(u32, u32),
}

pub const DEFAULT_PPQ: u32 = 480;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSignature {
    pub beats_per_bar: u32,
    pub beat_unit: u32,
}

impl TimeSignature {
    pub const COMMON: TimeSignature = TimeSignature { beats_per_bar: 4, beat_unit: 4 };

    pub fn new(beats_per_bar: u32, beat_unit: u32) -> Result<Self, ClockError> {
        if beats_per_bar == 0 || ![2, 4, 8].contains(&beat_unit) {
            return Err(ClockError::BadTimeSignature(beats_per_bar, beat_unit));
        }
        Ok(TimeSignature { beats_per_bar, beat_unit })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transport {
    pub tempo_bpm: f64,
    pub ppq: u32,
    pub running: bool,
    pub position_tick: u64,
    pub time_signature: TimeSignature,
    /// Tempo waiting for the next bar line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending_tempo_bpm: Option<f64>,
}

impl Default for Transport {
    fn default() -> Self {
        Transport::new(120.0, DEFAULT_PPQ)
    }
}

impl Transport {
    pub fn new(tempo_bpm: f64, ppq: u32) -> Self {
        Transport {
            tempo_bpm,
            ppq,
            running: false,
            position_tick: 0,
            time_signature: TimeSignature::COMMON,
            pending_tempo_bpm: None,
        }
    }

    pub fn with_time_signature(mut self, ts: TimeSignature) -> Self {
        self.time_signature = ts;
        self
    }

    pub fn started(mut self) -> Self {
        self.running = true;
        self
    }

    pub fn at(mut self, tick: u64) -> Self {
        self.position_tick = tick;
        self
    }

    /// Ticks per notated beat (a quarter note spans `ppq`).
    pub fn ticks_per_beat(&self) -> u64 {
        self.ppq as u64 * 4 / self.time_signature.beat_unit as u64
    }

    pub fn ticks_per_bar(&self) -> u64 {
        self.ticks_per_beat() * self.time_signature.beats_per_bar as u64
    }

    pub fn tick_to_ms(&self, tick: f64) -> f64 {
        tick * (60_000.0 / self.tempo_bpm) / self.ppq as f64
    }

    pub fn ms_to_tick(&self, ms: f64) -> f64 {
        ms * self.tempo_bpm * self.ppq as f64 / 60_000.0
    }

    /// Requests a tempo change, applied at the next bar line (immediately when
    /// stopped or exactly on a bar line).
    pub fn set_tempo(&mut self, bpm: f64) -> Result<(), ClockError> {
        if !(bpm.is_finite() && bpm > 0.0) {
            return Err(ClockError::BadTempo(bpm));
        }
        if !self.running || self.position_tick % self.ticks_per_bar() == 0 {
            self.tempo_bpm = bpm;
            self.pending_tempo_bpm = None;
        } else {
            self.pending_tempo_bpm = Some(bpm);
        }
        Ok(())
    }

    /// Moves the position forward by `round(elapsed_ms * bpm * ppq / 60000)`.
    /// A pending tempo takes over from the next bar line onwards.
    pub fn advance(&self, elapsed_ms: f64) -> Transport {
        let mut next = *self;
        if !self.running || !(elapsed_ms > 0.0) {
            return next;
        }
        let Some(new_tempo) = self.pending_tempo_bpm else {
            next.position_tick += self.ms_to_tick(elapsed_ms).round() as u64;
            return next;
        };
        let bar = self.ticks_per_bar();
        let boundary = (self.position_tick / bar + 1) * bar;
        let ms_to_boundary = self.tick_to_ms((boundary - self.position_tick) as f64);
        if elapsed_ms < ms_to_boundary {
            next.position_tick += self.ms_to_tick(elapsed_ms).round() as u64;
            return next;
        }
        next.tempo_bpm = new_tempo;
        next.pending_tempo_bpm = None;
        next.position_tick = boundary + next.ms_to_tick(elapsed_ms - ms_to_boundary).round() as u64;
        next
    }

    pub fn advance_ticks(&self, ticks: u64) -> Transport {
        let mut next = *self;
        if !self.running {
            return next;
        }
        let target = self.position_tick + ticks;
        if let Some(bpm) = self.pending_tempo_bpm {
            let bar = self.ticks_per_bar();
            if target >= (self.position_tick / bar + 1) * bar {
                next.tempo_bpm = bpm;
                next.pending_tempo_bpm = None;
            }
        }
        next.position_tick = target;
        next
    }
}

pub fn tick_to_ms(t: &Transport, tick: u64) -> f64 {
    t.tick_to_ms(tick as f64)
}

pub fn advance(t: &Transport, elapsed_ms: f64) -> Transport {
    t.advance(elapsed_ms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetronomeClick {
    pub tick: u64,
    pub accent: bool,
}

/// One click per beat for `bars` bars, accented on each downbeat.
pub fn metronome_events(t: &Transport, bars: u32) -> Result<Vec<MetronomeClick>, ClockError> {
    if bars == 0 {
        return Err(ClockError::NoBars);
    }
    let beat = t.ticks_per_beat();
    let per_bar = t.time_signature.beats_per_bar as u64;
    Ok((0..bars as u64 * per_bar).map(|i| MetronomeClick { tick: i * beat, accent: i % per_bar == 0 }).collect())
}

/// Clicks falling in the half-open tick window `(after, up_to]`, plus tick 0
/// when `after` is `None`.
pub fn metronome_between(t: &Transport, after: Option<u64>, up_to: u64) -> Vec<MetronomeClick> {
    let beat = t.ticks_per_beat();
    let per_bar = t.time_signature.beats_per_bar as u64;
    let first = match after {
        None => 0,
        Some(a) => a / beat + 1,
    };
    (first..=up_to / beat)
        .map(|i| MetronomeClick { tick: i * beat, accent: i % per_bar == 0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subdivision {
    #[default]
    Eighth,
    Sixteenth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwingProfile {
    /// Long:short ratio of a subdivision pair; 1.0 is straight.
    pub ratio: f64,
    pub subdivision: Subdivision,
}

impl Default for SwingProfile {
    /// Triplet swing on eighths.
    fn default() -> Self {
        SwingProfile { ratio: 2.0, subdivision: Subdivision::Eighth }
    }
}

impl SwingProfile {
    pub const STRAIGHT: SwingProfile = SwingProfile { ratio: 1.0, subdivision: Subdivision::Eighth };

    pub fn new(ratio: f64, subdivision: Subdivision) -> Result<Self, ClockError> {
        if !(1.0..=3.0).contains(&ratio) {
            return Err(ClockError::BadSwing(ratio));
        }
        Ok(SwingProfile { ratio, subdivision })
    }

    pub fn is_straight(&self) -> bool {
        self.ratio == 1.0
    }

    /// Length in ticks of one long+short pair.
    fn period(&self, ppq: u32) -> f64 {
        match self.subdivision {
            Subdivision::Eighth => ppq as f64,
            Subdivision::Sixteenth => ppq as f64 / 2.0,
        }
    }

    /// Piecewise-linear swing map on real-valued ticks.
    pub fn swing_exact(&self, straight: f64, ppq: u32) -> f64 {
        let period = self.period(ppq);
        let base = (straight / period).floor() * period;
        let pos = straight - base;
        let mid = period / 2.0;
        let r = self.ratio;
        let swung = if pos <= mid {
            pos * period * r / ((r + 1.0) * mid)
        } else {
            let swung_mid = period * r / (r + 1.0);
            swung_mid + (pos - mid) * (period - swung_mid) / (period - mid)
        };
        base + swung
    }

    /// Inverse of [`SwingProfile::swing_exact`].
    pub fn unswing_exact(&self, swung: f64, ppq: u32) -> f64 {
        let period = self.period(ppq);
        let base = (swung / period).floor() * period;
        let pos = swung - base;
        let mid = period / 2.0;
        let r = self.ratio;
        let swung_mid = period * r / (r + 1.0);
        let straight = if pos <= swung_mid {
            pos * (r + 1.0) * mid / (period * r)
        } else {
            mid + (pos - swung_mid) * (period - mid) / (period - swung_mid)
        };
        base + straight
    }
}

pub fn apply_swing(profile: &SwingProfile, straight_tick: u64, ppq: u32) -> u64 {
    if profile.is_straight() {
        return straight_tick;
    }
    profile.swing_exact(straight_tick as f64, ppq).round() as u64
}

pub fn remove_swing(profile: &SwingProfile, swung_tick: u64, ppq: u32) -> u64 {
    if profile.is_straight() {
        return swung_tick;
    }
    profile.unswing_exact(swung_tick as f64, ppq).round() as u64
}
