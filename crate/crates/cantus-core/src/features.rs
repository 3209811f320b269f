//! The feature algebra: windows composed with basis features.
//!
//! A feature expression selects a subset of voices (the window) and pipes
//! the resulting tuple through a chain of basis operators. Evaluating an
//! expression on a chord yields a [`FeatureValue`]; chords with equal
//! feature values are equivalent under that feature.
//!
//! Textual DSL (exact grammar, `ws` is zero or more spaces):
//!
//! ```text
//! feature := window ws "|>" ws basis ( ws "|>" ws basis )*
//! window  := "window[" index ( "," index )* "]"
//! basis   := "order" | "diff" | "mod12" | "sort" | "id"
//! index   := nonzero decimal integer
//! ```
//!
//! Basis operators:
//! - `id` — the windowed tuple unchanged.
//! - `mod12` — every pitch modulo 12 (octave equivalence); rests pass through.
//! - `sort` — pitches ascending, rests moved to the end.
//! - `diff` — adjacent differences, slot j minus slot j+1, so a positive
//!   entry means the earlier-listed voice sounds higher; any rest operand
//!   yields a rest. Shrinks the tuple by one, so it needs length >= 2.
//! - `order` — the relative ranking of the slots as a canonical order
//!   string, e.g. `4<3<2<1`; ties join with `=` and resting slots are
//!   appended with `!`. Terminal: nothing can follow it.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Chord, VoiceEvent};

/// An entry of an integer-vector feature value: an integer or a rest.
///
/// Entries start out as MIDI pitches but may go negative under `diff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntEntry {
    Int(i32),
    Rest,
}

impl From<VoiceEvent> for IntEntry {
    fn from(event: VoiceEvent) -> Self {
        match event {
            VoiceEvent::Pitch(p) => IntEntry::Int(p as i32),
            VoiceEvent::Rest => IntEntry::Rest,
        }
    }
}

impl fmt::Display for IntEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntEntry::Int(v) => write!(f, "{v}"),
            IntEntry::Rest => write!(f, "R"),
        }
    }
}

/// A strictly increasing, non-empty tuple of 1-based voice indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Window {
    indices: Vec<usize>,
}

impl Window {
    pub fn new(indices: Vec<usize>) -> Result<Self, FeatureError> {
        if indices.is_empty() {
            return Err(FeatureError::EmptyWindow);
        }
        if indices[0] == 0 || !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(FeatureError::WindowNotAscending);
        }
        Ok(Window { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Largest selected voice index; the minimum arity this window needs.
    pub fn max_index(&self) -> usize {
        *self.indices.last().expect("window is non-empty")
    }

    /// Select the windowed voices of `chord`, slot j taking the event of
    /// voice `indices[j]`.
    pub fn apply(&self, chord: &Chord) -> Result<Vec<IntEntry>, FeatureError> {
        self.indices
            .iter()
            .map(|&voice| {
                chord
                    .event(voice)
                    .map(IntEntry::from)
                    .ok_or(FeatureError::IndexOutOfRange {
                        index: voice,
                        arity: chord.arity(),
                    })
            })
            .collect()
    }
}

/// An elementary operator over a windowed tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisFeature {
    Id,
    Mod12,
    Sort,
    Diff,
    Order,
}

impl BasisFeature {
    /// All basis features in enumeration order.
    pub const ALL: [BasisFeature; 5] = [
        BasisFeature::Id,
        BasisFeature::Mod12,
        BasisFeature::Sort,
        BasisFeature::Diff,
        BasisFeature::Order,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BasisFeature::Id => "id",
            BasisFeature::Mod12 => "mod12",
            BasisFeature::Sort => "sort",
            BasisFeature::Diff => "diff",
            BasisFeature::Order => "order",
        }
    }

    /// Terminal features produce a symbol; nothing can be chained after them.
    pub fn is_terminal(&self) -> bool {
        matches!(self, BasisFeature::Order)
    }

    /// Apply this operator to an integer tuple.
    pub fn apply(&self, values: &[IntEntry]) -> Result<FeatureValue, FeatureError> {
        match self {
            BasisFeature::Id => Ok(FeatureValue::IntVector(values.to_vec())),
            BasisFeature::Mod12 => Ok(FeatureValue::IntVector(
                values
                    .iter()
                    .map(|e| match e {
                        IntEntry::Int(v) => IntEntry::Int(v.rem_euclid(12)),
                        IntEntry::Rest => IntEntry::Rest,
                    })
                    .collect(),
            )),
            BasisFeature::Sort => {
                let mut pitches: Vec<i32> = Vec::new();
                let mut rests = 0usize;
                for e in values {
                    match e {
                        IntEntry::Int(v) => pitches.push(*v),
                        IntEntry::Rest => rests += 1,
                    }
                }
                pitches.sort_unstable();
                let mut out: Vec<IntEntry> = pitches.into_iter().map(IntEntry::Int).collect();
                out.extend(core::iter::repeat(IntEntry::Rest).take(rests));
                Ok(FeatureValue::IntVector(out))
            }
            BasisFeature::Diff => {
                if values.len() < 2 {
                    return Err(FeatureError::DiffArity);
                }
                Ok(FeatureValue::IntVector(
                    values
                        .windows(2)
                        .map(|w| match (w[0], w[1]) {
                            (IntEntry::Int(a), IntEntry::Int(b)) => IntEntry::Int(a - b),
                            _ => IntEntry::Rest,
                        })
                        .collect(),
                ))
            }
            BasisFeature::Order => Ok(FeatureValue::OrderString(order_string(values))),
        }
    }
}

impl fmt::Display for BasisFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Canonical order string of a tuple.
///
/// Slots are 1-based positions in the tuple. Sounding slots are sorted by
/// pitch ascending; equal pitches form `=`-groups with slot labels ascending
/// inside the group; groups join with `<`. Resting slots follow the chain in
/// ascending slot order, each preceded by `!`. An all-rest input yields
/// `!1!2...`.
fn order_string(values: &[IntEntry]) -> String {
    let mut sounding: Vec<(i32, usize)> = Vec::new();
    let mut rests: Vec<usize> = Vec::new();
    for (i, e) in values.iter().enumerate() {
        match e {
            IntEntry::Int(v) => sounding.push((*v, i + 1)),
            IntEntry::Rest => rests.push(i + 1),
        }
    }
    sounding.sort_unstable();

    let mut out = String::new();
    let mut prev_pitch: Option<i32> = None;
    for (pitch, slot) in sounding {
        match prev_pitch {
            None => {}
            Some(p) if p == pitch => out.push('='),
            Some(_) => out.push('<'),
        }
        out.push_str(&slot.to_string());
        prev_pitch = Some(pitch);
    }
    for slot in rests {
        out.push('!');
        out.push_str(&slot.to_string());
    }
    out
}

/// The output of a feature: an integer vector or a canonical order string.
///
/// Serialized form: int vectors as `(a,b,...)` with `R` for rests and no
/// spaces; order strings as themselves.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureValue {
    IntVector(Vec<IntEntry>),
    OrderString(String),
}

impl FeatureValue {
    pub fn as_int_vector(&self) -> Option<&[IntEntry]> {
        match self {
            FeatureValue::IntVector(v) => Some(v),
            FeatureValue::OrderString(_) => None,
        }
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::IntVector(entries) => {
                f.write_str("(")?;
                for (i, e) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
            FeatureValue::OrderString(s) => f.write_str(s),
        }
    }
}

impl core::str::FromStr for FeatureValue {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(inner) = s.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| bad_value(s, "missing closing parenthesis"))?;
            if inner.is_empty() {
                return Err(bad_value(s, "empty vector"));
            }
            let mut entries = Vec::new();
            for part in inner.split(',') {
                if part == "R" {
                    entries.push(IntEntry::Rest);
                } else {
                    let v = part
                        .parse::<i32>()
                        .map_err(|_| bad_value(s, "expected an integer or `R`"))?;
                    entries.push(IntEntry::Int(v));
                }
            }
            Ok(FeatureValue::IntVector(entries))
        } else {
            parse_order_string(s)?;
            Ok(FeatureValue::OrderString(s.to_string()))
        }
    }
}

fn bad_value(value: &str, message: &str) -> FeatureError {
    FeatureError::InvalidValue {
        value: value.to_string(),
        message: message.to_string(),
    }
}

/// Validate that `s` is a canonical order string; returns the slot labels.
///
/// Checks the grammar plus the canonical-form constraints that are visible
/// in the string itself: labels are positive and globally distinct, labels
/// ascend within an `=`-group, and rest labels ascend.
fn parse_order_string(s: &str) -> Result<(), FeatureError> {
    if s.is_empty() {
        return Err(bad_value(s, "empty order string"));
    }
    let bytes = s.as_bytes();
    let mut pos = 0usize;
    let mut seen: Vec<usize> = Vec::new();

    let read_label = |pos: &mut usize| -> Result<usize, FeatureError> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(bad_value(s, "expected a slot label"));
        }
        let label: usize = s[start..*pos]
            .parse()
            .map_err(|_| bad_value(s, "slot label too large"))?;
        if label == 0 {
            return Err(bad_value(s, "slot labels are 1-based"));
        }
        Ok(label)
    };

    // sounding chain, unless the string starts with the rest marker
    let mut in_rests = bytes[0] == b'!';
    let mut prev_group_label: Option<usize> = None;
    while !in_rests {
        let label = read_label(&mut pos)?;
        if let Some(prev) = prev_group_label {
            if label <= prev {
                return Err(bad_value(s, "tied slot labels must ascend"));
            }
        }
        if seen.contains(&label) {
            return Err(bad_value(s, "duplicate slot label"));
        }
        seen.push(label);
        match bytes.get(pos) {
            Some(b'=') => {
                prev_group_label = Some(label);
                pos += 1;
            }
            Some(b'<') => {
                prev_group_label = None;
                pos += 1;
            }
            Some(b'!') => in_rests = true,
            None => return Ok(()),
            Some(_) => return Err(bad_value(s, "unexpected character")),
        }
    }

    let mut prev_rest: Option<usize> = None;
    while pos < bytes.len() {
        if bytes[pos] != b'!' {
            return Err(bad_value(s, "unexpected character"));
        }
        pos += 1;
        let label = read_label(&mut pos)?;
        if seen.contains(&label) {
            return Err(bad_value(s, "duplicate slot label"));
        }
        if let Some(prev) = prev_rest {
            if label <= prev {
                return Err(bad_value(s, "rest slot labels must ascend"));
            }
        }
        seen.push(label);
        prev_rest = Some(label);
    }
    Ok(())
}

/// A window plus a non-empty chain of basis features; the unit of
/// abstraction over chords.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureExpr {
    window: Window,
    chain: Vec<BasisFeature>,
}

impl FeatureExpr {
    /// Build an expression, running the static checks: the chain is
    /// non-empty, only its last element may be terminal, and every `diff`
    /// sees a tuple of length >= 2.
    pub fn new(window: Window, chain: Vec<BasisFeature>) -> Result<Self, FeatureError> {
        check_chain(window.len(), &chain)?;
        Ok(FeatureExpr { window, chain })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn chain(&self) -> &[BasisFeature] {
        &self.chain
    }

    /// Minimum corpus arity this expression can be evaluated on.
    pub fn min_arity(&self) -> usize {
        self.window.max_index()
    }

    /// Evaluate on a chord: apply the window, then fold the chain left to
    /// right. Total on any chord of sufficient arity, including all-rests.
    pub fn evaluate(&self, chord: &Chord) -> Result<FeatureValue, FeatureError> {
        let mut current = self.window.apply(chord)?;
        let last = self.chain.len() - 1;
        for (i, basis) in self.chain.iter().enumerate() {
            let value = basis.apply(&current)?;
            if i == last {
                return Ok(value);
            }
            current = match value {
                FeatureValue::IntVector(v) => v,
                // static checks reject terminal features mid-chain
                FeatureValue::OrderString(_) => unreachable!("terminal basis mid-chain"),
            };
        }
        unreachable!("chain is non-empty")
    }
}

impl fmt::Display for FeatureExpr {
    /// Canonical DSL spelling: `window[1,2] |> diff |> mod12`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("window[")?;
        for (i, idx) in self.window.indices().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{idx}")?;
        }
        f.write_str("]")?;
        for basis in &self.chain {
            write!(f, " |> {basis}")?;
        }
        Ok(())
    }
}

impl core::str::FromStr for FeatureExpr {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser::new(s).parse()
    }
}

fn check_chain(window_len: usize, chain: &[BasisFeature]) -> Result<(), FeatureError> {
    if chain.is_empty() {
        return Err(FeatureError::EmptyChain);
    }
    let mut len = window_len;
    for (i, basis) in chain.iter().enumerate() {
        if basis.is_terminal() && i + 1 != chain.len() {
            return Err(FeatureError::TerminalNotLast);
        }
        if *basis == BasisFeature::Diff {
            if len < 2 {
                return Err(FeatureError::DiffArity);
            }
            len -= 1;
        }
    }
    Ok(())
}

/// Hand-rolled cursor parser for the feature DSL. Positions are 0-based
/// byte offsets into the input.
struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn error(&self, message: &str) -> FeatureError {
        FeatureError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn eat(&mut self, literal: &str, expected: &str) -> Result<(), FeatureError> {
        if self.rest().starts_with(literal) {
            self.pos += literal.len();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn skip_spaces(&mut self) {
        while self.rest().starts_with(' ') {
            self.pos += 1;
        }
    }

    fn index(&mut self) -> Result<usize, FeatureError> {
        let digits: &str = {
            let rest = self.rest();
            let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            &rest[..end]
        };
        if digits.is_empty() {
            return Err(self.error("expected a voice index"));
        }
        let value: usize = digits
            .parse()
            .map_err(|_| self.error("voice index too large"))?;
        if value == 0 {
            return Err(self.error("voice index must be >= 1"));
        }
        self.pos += digits.len();
        Ok(value)
    }

    fn basis(&mut self) -> Result<BasisFeature, FeatureError> {
        let word: &str = {
            let rest = self.rest();
            let end = rest
                .find(|c: char| !c.is_ascii_alphanumeric())
                .unwrap_or(rest.len());
            &rest[..end]
        };
        let basis = BasisFeature::ALL
            .iter()
            .find(|b| b.name() == word)
            .copied()
            .ok_or_else(|| {
                self.error("expected a basis function (order, diff, mod12, sort, id)")
            })?;
        self.pos += word.len();
        Ok(basis)
    }

    fn parse(mut self) -> Result<FeatureExpr, FeatureError> {
        self.eat("window[", "expected `window[`")?;
        let mut indices = alloc::vec![self.index()?];
        loop {
            if self.rest().starts_with(',') {
                self.pos += 1;
                indices.push(self.index()?);
            } else {
                break;
            }
        }
        self.eat("]", "expected `,` or `]`")?;
        let window = Window::new(indices)?;

        let mut chain = Vec::new();
        loop {
            self.skip_spaces();
            self.eat("|>", "expected `|>`")?;
            self.skip_spaces();
            chain.push(self.basis()?);
            if self.rest().is_empty() {
                break;
            }
        }
        FeatureExpr::new(window, chain)
    }
}

/// Systematically generate every statically valid feature expression with a
/// window over `{1..arity}` and a chain of at most `max_chain` basis
/// features. `id` appears only as a sole chain element; longer chains built
/// from it would only duplicate shorter expressions.
///
/// Order: windows shortlex (length, then lexicographic); chains
/// lexicographic in the kind order `id < mod12 < sort < diff < order`, a
/// prefix sorting before its extensions.
pub fn enumerate_features(arity: usize, max_chain: usize) -> Vec<FeatureExpr> {
    assert!(arity >= 1, "arity must be at least 1");
    assert!(max_chain >= 1, "max_chain must be at least 1");
    let mut out = Vec::new();
    for window in windows_shortlex(arity) {
        let mut chain = Vec::new();
        extend_chains(window.len(), max_chain, &mut chain, &mut |chain| {
            out.push(FeatureExpr {
                window: window.clone(),
                chain: chain.to_vec(),
            });
        });
    }
    out
}

/// Non-empty strictly increasing subsets of `1..=arity` in shortlex order.
fn windows_shortlex(arity: usize) -> Vec<Window> {
    fn fill(
        start: usize,
        arity: usize,
        len: usize,
        combo: &mut Vec<usize>,
        out: &mut Vec<Window>,
    ) {
        if combo.len() == len {
            out.push(Window {
                indices: combo.clone(),
            });
            return;
        }
        for i in start..=arity {
            combo.push(i);
            fill(i + 1, arity, len, combo, out);
            combo.pop();
        }
    }

    let mut windows = Vec::new();
    let mut combo = Vec::new();
    for len in 1..=arity {
        fill(1, arity, len, &mut combo, &mut windows);
    }
    windows
}

/// Depth-first extension of `chain`, emitting each valid non-empty prefix.
fn extend_chains(
    window_len: usize,
    max_chain: usize,
    chain: &mut Vec<BasisFeature>,
    emit: &mut impl FnMut(&[BasisFeature]),
) {
    if chain.len() >= max_chain {
        return;
    }
    let current_len = chain
        .iter()
        .filter(|b| **b == BasisFeature::Diff)
        .count();
    let current_len = window_len - current_len;
    for basis in BasisFeature::ALL {
        match basis {
            // id only as the sole chain element
            BasisFeature::Id if !chain.is_empty() => continue,
            BasisFeature::Diff if current_len < 2 => continue,
            _ => {}
        }
        chain.push(basis);
        emit(chain);
        let terminal = basis.is_terminal();
        let sole_id = basis == BasisFeature::Id;
        if !terminal && !sole_id {
            extend_chains(window_len, max_chain, chain, emit);
        }
        chain.pop();
    }
}

/// Errors from parsing, validating, or evaluating features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureError {
    /// DSL syntax error at a 0-based byte offset.
    Syntax { position: usize, message: String },
    EmptyWindow,
    WindowNotAscending,
    EmptyChain,
    /// A terminal basis (`order`) appears before the end of the chain.
    TerminalNotLast,
    /// `diff` applied to a tuple of length < 2.
    DiffArity,
    /// Window index exceeds the chord arity.
    IndexOutOfRange { index: usize, arity: usize },
    /// A serialized feature value that does not parse.
    InvalidValue { value: String, message: String },
}

impl fmt::Display for FeatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureError::Syntax { position, message } => {
                write!(f, "syntax error at column {}: {message}", position + 1)
            }
            FeatureError::EmptyWindow => write!(f, "window must select at least one voice"),
            FeatureError::WindowNotAscending => {
                write!(f, "window indices must be distinct and ascending")
            }
            FeatureError::EmptyChain => write!(f, "feature needs at least one basis function"),
            FeatureError::TerminalNotLast => write!(f, "terminal basis must be last"),
            FeatureError::DiffArity => write!(f, "diff requires length >= 2"),
            FeatureError::IndexOutOfRange { index, arity } => {
                write!(f, "window index {index} exceeds chord arity {arity}")
            }
            FeatureError::InvalidValue { value, message } => {
                write!(f, "invalid feature value `{value}`: {message}")
            }
        }
    }
}

impl core::error::Error for FeatureError {}
