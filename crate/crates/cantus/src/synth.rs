//! Seeded synthetic corpus generation.
//!
//! Each chord gets distinct pitches arranged strictly descending across the
//! voices (voice 1 highest), so the full-window order rule concentrates on
//! a single value. With probability `crossing_rate` one random adjacent
//! voice pair is swapped, planting exactly one voice crossing in that
//! chord. ChaCha8 keeps output byte-identical for a given seed across
//! platforms and runs.

use cantus_core::{Chord, Corpus, Piece, VoiceEvent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub voices: usize,
    /// Chords per piece.
    pub length: usize,
    pub pieces: usize,
    pub seed: u64,
    /// Probability that a chord carries one adjacent-voice swap.
    pub crossing_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthError {
    InvalidVoices(usize),
    InvalidLength(usize),
    InvalidPieces(usize),
    InvalidCrossingRate(f64),
}

impl std::fmt::Display for SynthError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SynthError::InvalidVoices(n) => {
                write!(f, "voices must be between 1 and 128, got {n}")
            }
            SynthError::InvalidLength(n) => write!(f, "length must be at least 1, got {n}"),
            SynthError::InvalidPieces(n) => write!(f, "pieces must be at least 1, got {n}"),
            SynthError::InvalidCrossingRate(r) => {
                write!(f, "crossing rate must be within [0, 1], got {r}")
            }
        }
    }
}

impl std::error::Error for SynthError {}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        // distinct MIDI pitches bound the voice count
        if self.voices == 0 || self.voices > 128 {
            return Err(SynthError::InvalidVoices(self.voices));
        }
        if self.length == 0 {
            return Err(SynthError::InvalidLength(self.length));
        }
        if self.pieces == 0 {
            return Err(SynthError::InvalidPieces(self.pieces));
        }
        if !(0.0..=1.0).contains(&self.crossing_rate) {
            return Err(SynthError::InvalidCrossingRate(self.crossing_rate));
        }
        Ok(())
    }
}

/// Generate the corpus described by `config`. Deterministic in the seed.
pub fn synth_corpus(config: &SynthConfig) -> Result<Corpus, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pieces = Vec::with_capacity(config.pieces);
    for index in 0..config.pieces {
        let chords = (0..config.length)
            .map(|_| synth_chord(&mut rng, config.voices, config.crossing_rate))
            .collect();
        let piece = Piece::new(format!("synth-{:03}", index + 1), chords)
            .expect("generated pieces are valid");
        pieces.push(piece);
    }
    Ok(Corpus::new(pieces).expect("generated corpora are valid"))
}

fn synth_chord(rng: &mut ChaCha8Rng, voices: usize, crossing_rate: f64) -> Chord {
    // distinct pitches, sorted descending so voice 1 is highest
    let mut pitches: Vec<u8> = rand::seq::index::sample(rng, 128, voices)
        .into_iter()
        .map(|p| p as u8)
        .collect();
    pitches.sort_unstable_by(|a, b| b.cmp(a));
    if voices >= 2 && crossing_rate > 0.0 && rng.gen_bool(crossing_rate) {
        let j = rng.gen_range(0..voices - 1);
        pitches.swap(j, j + 1);
    }
    Chord::new(pitches.into_iter().map(VoiceEvent::Pitch).collect())
}
