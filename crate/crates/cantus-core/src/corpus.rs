//! Multi-voice corpora as chord slices.
//!
//! The corpus text format is line-oriented UTF-8:
//!
//! ```text
//! #piece chorale-1
//! 67 60 55 48
//! 67 62 R  47
//! # a comment
//! ```
//!
//! Lines beginning `#piece ` open a new piece (the remainder of the line is
//! the piece name), other `#` lines are comments, blank lines are ignored,
//! and every remaining line is one chord: n whitespace-separated tokens,
//! each a decimal integer 0–127 or `R` for a rest. Voice 1 is the leftmost
//! column (the highest-labeled voice, soprano in 4-voice writing).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// One voice's contribution to a chord: a MIDI pitch or a rest.
///
/// Pitches are MIDI numbers in 0–127 (middle C = 60).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VoiceEvent {
    Pitch(u8),
    Rest,
}

impl VoiceEvent {
    /// A sounding pitch. Panics if `pitch` exceeds the MIDI range.
    pub fn pitch(pitch: u8) -> Self {
        assert!(pitch <= 127, "MIDI pitch out of range: {pitch}");
        VoiceEvent::Pitch(pitch)
    }

    pub fn is_rest(&self) -> bool {
        matches!(self, VoiceEvent::Rest)
    }
}

impl fmt::Display for VoiceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VoiceEvent::Pitch(p) => write!(f, "{p}"),
            VoiceEvent::Rest => write!(f, "R"),
        }
    }
}

/// One time slice of an n-voice piece.
///
/// Voice indices are 1-based: voice 1 is the first event.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chord {
    events: Vec<VoiceEvent>,
}

impl Chord {
    /// Panics if `events` is empty; a chord has at least one voice.
    pub fn new(events: Vec<VoiceEvent>) -> Self {
        assert!(!events.is_empty(), "a chord needs at least one voice");
        Chord { events }
    }

    /// Convenience constructor for all-sounding chords.
    pub fn from_pitches(pitches: &[u8]) -> Self {
        Chord::new(pitches.iter().map(|&p| VoiceEvent::pitch(p)).collect())
    }

    pub fn arity(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[VoiceEvent] {
        &self.events
    }

    /// Event of the 1-based `voice`, or `None` when out of range.
    pub fn event(&self, voice: usize) -> Option<VoiceEvent> {
        if voice == 0 {
            return None;
        }
        self.events.get(voice - 1).copied()
    }
}

/// A named, time-ordered sequence of same-arity chords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    name: String,
    chords: Vec<Chord>,
}

impl Piece {
    pub fn new(name: impl Into<String>, chords: Vec<Chord>) -> Result<Self, CorpusError> {
        let name = name.into();
        if name.contains('\n') || name.contains('\r') {
            return Err(CorpusError::InvalidPieceName { name });
        }
        if chords.is_empty() {
            return Err(CorpusError::PieceWithoutChords { name });
        }
        let arity = chords[0].arity();
        if chords.iter().any(|c| c.arity() != arity) {
            return Err(CorpusError::PieceMixedArity { name });
        }
        Ok(Piece { name, chords })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chords(&self) -> &[Chord] {
        &self.chords
    }

    /// Number of time slices (T).
    pub fn len(&self) -> usize {
        self.chords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.chords[0].arity()
    }

    /// Iterate the k-gram windows of this piece: for every position
    /// `t = k..=T`, the previous `k-1` chords as context and chord `t` as
    /// target. Pieces shorter than `k` yield nothing.
    ///
    /// Panics if `k == 0`.
    pub fn kgram_windows(&self, k: usize) -> impl Iterator<Item = KgramWindow<'_>> {
        assert!(k >= 1, "gram order must be at least 1");
        let chords = &self.chords;
        (0..chords.len().saturating_sub(k - 1)).map(move |start| KgramWindow {
            context: &chords[start..start + k - 1],
            target: &chords[start + k - 1],
        })
    }
}

/// One k-gram observation: `k - 1` context chords followed by the target.
#[derive(Debug, Clone, Copy)]
pub struct KgramWindow<'a> {
    pub context: &'a [Chord],
    pub target: &'a Chord,
}

/// An ordered collection of pieces sharing one arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pieces: Vec<Piece>,
    arity: usize,
}

impl Corpus {
    pub fn new(pieces: Vec<Piece>) -> Result<Self, CorpusError> {
        let first = pieces.first().ok_or(CorpusError::NoPieces)?;
        let arity = first.arity();
        for piece in &pieces {
            if piece.arity() != arity {
                return Err(CorpusError::CorpusMixedArity {
                    piece: piece.name().to_string(),
                    expected: arity,
                    found: piece.arity(),
                });
            }
        }
        Ok(Corpus { pieces, arity })
    }

    /// Parse the corpus text format. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut pieces: Vec<Piece> = Vec::new();
        let mut arity: Option<usize> = None;
        // (header line, name, chords) of the piece being read
        let mut current: Option<(usize, String, Vec<Chord>)> = None;

        let close =
            |current: &mut Option<(usize, String, Vec<Chord>)>, pieces: &mut Vec<Piece>| {
                if let Some((header_line, name, chords)) = current.take() {
                    if chords.is_empty() {
                        return Err(CorpusError::EmptyPiece {
                            line: header_line,
                            name,
                        });
                    }
                    // arity and name already validated line by line
                    pieces.push(Piece { name, chords });
                }
                Ok(())
            };

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if let Some(name) = raw.strip_prefix("#piece ") {
                close(&mut current, &mut pieces)?;
                current = Some((line, name.to_string(), Vec::new()));
                continue;
            }
            if raw.starts_with('#') {
                continue; // comment
            }
            if raw.trim().is_empty() {
                continue;
            }
            let (_, _, chords) = current
                .as_mut()
                .ok_or(CorpusError::ChordBeforeHeader { line })?;
            let mut events = Vec::new();
            for token in raw.split(|c| c == ' ' || c == '\t').filter(|t| !t.is_empty()) {
                events.push(parse_token(token, line)?);
            }
            match arity {
                None => arity = Some(events.len()),
                Some(expected) if events.len() != expected => {
                    return Err(CorpusError::ArityMismatch {
                        line,
                        expected,
                        found: events.len(),
                    });
                }
                Some(_) => {}
            }
            chords.push(Chord { events });
        }
        close(&mut current, &mut pieces)?;

        match arity {
            Some(arity) if !pieces.is_empty() => Ok(Corpus { pieces, arity }),
            _ => Err(CorpusError::NoPieces),
        }
    }

    /// Canonical corpus text; inverse of [`Corpus::parse`].
    pub fn format(&self) -> String {
        let mut out = String::new();
        for piece in &self.pieces {
            out.push_str("#piece ");
            out.push_str(&piece.name);
            out.push('\n');
            for chord in &piece.chords {
                let mut first = true;
                for event in &chord.events {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    out.push_str(&event.to_string());
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Number of voices shared by every chord.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Total number of chords across all pieces.
    pub fn num_chords(&self) -> usize {
        self.pieces.iter().map(Piece::len).sum()
    }

    /// K-gram windows of every piece, in piece order then position order.
    /// Windows never span piece boundaries. Panics if `k == 0`.
    pub fn kgram_windows(&self, k: usize) -> impl Iterator<Item = KgramWindow<'_>> {
        assert!(k >= 1, "gram order must be at least 1");
        self.pieces.iter().flat_map(move |p| p.kgram_windows(k))
    }
}

impl core::str::FromStr for Corpus {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Corpus::parse(s)
    }
}

fn parse_token(token: &str, line: usize) -> Result<VoiceEvent, CorpusError> {
    if token == "R" {
        return Ok(VoiceEvent::Rest);
    }
    match token.parse::<u8>() {
        Ok(p) if p <= 127 => Ok(VoiceEvent::Pitch(p)),
        _ => Err(CorpusError::MalformedToken {
            line,
            token: token.to_string(),
        }),
    }
}

/// Errors from parsing or constructing corpora.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    /// A chord token that is neither an integer 0–127 nor `R`.
    MalformedToken { line: usize, token: String },
    /// A chord line whose voice count differs from the corpus arity.
    ArityMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    /// A `#piece` header with no chord lines before the next header or EOF.
    EmptyPiece { line: usize, name: String },
    /// A chord line before any `#piece` header.
    ChordBeforeHeader { line: usize },
    /// The text contains no pieces at all.
    NoPieces,
    InvalidPieceName { name: String },
    PieceWithoutChords { name: String },
    PieceMixedArity { name: String },
    CorpusMixedArity {
        piece: String,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::MalformedToken { line, token } => {
                write!(f, "malformed token `{token}` at line {line}: expected an integer 0-127 or `R`")
            }
            CorpusError::ArityMismatch {
                line,
                expected,
                found,
            } => write!(
                f,
                "arity mismatch at line {line}: expected {expected} voices, found {found}"
            ),
            CorpusError::EmptyPiece { line, name } => {
                write!(f, "empty piece `{name}` at line {line}")
            }
            CorpusError::ChordBeforeHeader { line } => {
                write!(f, "chord line before any #piece header at line {line}")
            }
            CorpusError::NoPieces => write!(f, "empty corpus: no pieces"),
            CorpusError::InvalidPieceName { name } => {
                write!(f, "piece name contains a line break: {name:?}")
            }
            CorpusError::PieceWithoutChords { name } => {
                write!(f, "piece `{name}` has no chords")
            }
            CorpusError::PieceMixedArity { name } => {
                write!(f, "piece `{name}` mixes chords of different arities")
            }
            CorpusError::CorpusMixedArity {
                piece,
                expected,
                found,
            } => write!(
                f,
                "piece `{piece}` has arity {found}, corpus arity is {expected}"
            ),
        }
    }
}

impl core::error::Error for CorpusError {}
