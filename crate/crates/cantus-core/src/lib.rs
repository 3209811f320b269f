//! Rule discovery for multi-voice symbolic music.
//!
//! A piece is a time-ordered sequence of chords; a chord is one vertical
//! slice of per-voice pitch-or-rest events. Chords are abstracted through
//! *features*: a window selecting a subset of voices followed by a chain of
//! basis operators (`order`, `diff`, `mod12`, `sort`, `id`). Every feature
//! induces an equivalence relation on the chord space, and a *rule* is the
//! empirical histogram of feature values over a corpus, optionally
//! conditioned on the feature values of the previous chords (k-grams).
//!
//! The crate is `no_std`-compatible (requires `alloc`). All parsing and
//! serialization works on in-memory strings; file IO lives in the `cantus`
//! companion crate along with the CLI.
//!
//! Module map:
//! - [`corpus`] — chord/piece/corpus types, the corpus text format, and
//!   k-gram window iteration.
//! - [`features`] — the feature algebra, its textual DSL, and systematic
//!   feature enumeration.
//! - [`rules`] — histogram extraction, dominating peaks, and the rule file
//!   format.
//! - [`render`] — text and SVG histogram rendering plus qualitative
//!   likelihood descriptions.
//! - [`assess`] — keyword-rubric grading of free-text rule interpretations
//!   and cohort score summaries.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod assess;
pub mod corpus;
pub mod features;
pub mod render;
pub mod rules;

pub use corpus::{Chord, Corpus, CorpusError, Piece, VoiceEvent};
pub use features::{
    enumerate_features, BasisFeature, FeatureError, FeatureExpr, FeatureValue, IntEntry, Window,
};
pub use render::{describe, render_svg, render_text, Band, RenderError};
pub use rules::{ContextKey, Histogram, Rule, RuleError, RuleSpec, ValueHistogram};
