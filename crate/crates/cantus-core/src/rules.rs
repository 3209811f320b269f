//! Histogram rules: empirical distributions of feature values.
//!
//! A rule pairs a feature with the histogram of its values over a corpus.
//! A 1-gram rule is a single unconditional histogram; a k-gram rule (k >= 2)
//! keeps one histogram per observed tuple of context feature values, the
//! context being the previous k-1 chords. Counts are exact integers;
//! probabilities are derived views.
//!
//! Rule file format (UTF-8, histogram lines are value TAB count):
//!
//! ```text
//! feature: window[1,2] |> diff
//! gram: 2
//! context-feature: window[1,2] |> diff
//! context: (7)
//! (5)	2
//! (7)	1
//!
//! context: (12)
//! (0)	3
//! ```
//!
//! Context blocks sort lexicographically by serialized context; histogram
//! lines sort by descending count, ties by serialized value. A 1-gram file
//! has no context lines: the histogram follows `gram: 1` directly.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Corpus, Piece};
use crate::features::{FeatureError, FeatureExpr, FeatureValue};

/// An exact-count histogram over keys of type `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram<K: Ord> {
    entries: BTreeMap<K, u64>,
    total: u64,
}

pub type ValueHistogram = Histogram<FeatureValue>;

impl<K: Ord> Histogram<K> {
    pub fn new() -> Self {
        Histogram {
            entries: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn increment(&mut self, key: K) {
        self.add(key, 1);
    }

    /// Add `count` observations of `key`; adding zero is a no-op.
    pub fn add(&mut self, key: K, count: u64) {
        if count == 0 {
            return;
        }
        *self.entries.entry(key).or_insert(0) += count;
        self.total += count;
    }

    /// Value-wise count addition.
    pub fn merge(&mut self, other: Histogram<K>) {
        for (key, count) in other.entries {
            self.add(key, count);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, key: &K) -> u64 {
        self.entries.get(key).copied().unwrap_or(0)
    }

    pub fn probability(&self, key: &K) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count(key) as f64 / self.total as f64
    }

    /// Number of distinct observed values (the support size).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.entries.iter().map(|(k, &c)| (k, c))
    }

    /// The unique most-probable value and its probability, provided that
    /// probability reaches `threshold` and no other value ties for the
    /// maximum count. Panics if `threshold` is outside (0, 1].
    pub fn dominating_peak(&self, threshold: f64) -> Option<(&K, f64)> {
        assert!(
            threshold > 0.0 && threshold <= 1.0,
            "peak threshold must be in (0, 1]"
        );
        let mut best: Option<(&K, u64)> = None;
        let mut tied = false;
        for (key, count) in self.iter() {
            match best {
                Some((_, c)) if count > c => {
                    best = Some((key, count));
                    tied = false;
                }
                Some((_, c)) if count == c => tied = true,
                Some(_) => {}
                None => best = Some((key, count)),
            }
        }
        let (key, count) = best?;
        let p = count as f64 / self.total as f64;
        (!tied && p >= threshold).then_some((key, p))
    }
}

impl<K: Ord> FromIterator<(K, u64)> for Histogram<K> {
    fn from_iter<I: IntoIterator<Item = (K, u64)>>(iter: I) -> Self {
        let mut h = Histogram::new();
        for (key, count) in iter {
            h.add(key, count);
        }
        h
    }
}

/// An ordered tuple of context feature values keying a conditional table.
///
/// Serialized as the member values joined by commas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextKey(Vec<FeatureValue>);

impl ContextKey {
    pub fn new(values: Vec<FeatureValue>) -> Self {
        ContextKey(values)
    }

    pub fn values(&self) -> &[FeatureValue] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ContextKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl core::str::FromStr for ContextKey {
    type Err = FeatureError;

    /// Split on commas outside parentheses, then parse each value.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut values = Vec::new();
        let mut depth = 0usize;
        let mut start = 0usize;
        for (i, c) in s.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    values.push(s[start..i].parse::<FeatureValue>()?);
                    start = i + 1;
                }
                _ => {}
            }
        }
        values.push(s[start..].parse::<FeatureValue>()?);
        Ok(ContextKey(values))
    }
}

/// What to extract: a target feature, a gram order, and (for k >= 2) the
/// feature evaluated on the context chords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSpec {
    target: FeatureExpr,
    k: usize,
    context: Option<FeatureExpr>,
}

impl RuleSpec {
    /// `context` must be present exactly when `k >= 2`.
    pub fn new(
        target: FeatureExpr,
        k: usize,
        context: Option<FeatureExpr>,
    ) -> Result<Self, RuleError> {
        if k == 0 {
            return Err(RuleError::InvalidGram);
        }
        if k >= 2 && context.is_none() {
            return Err(RuleError::ContextRequired);
        }
        if k == 1 && context.is_some() {
            return Err(RuleError::ContextForbidden);
        }
        Ok(RuleSpec { target, k, context })
    }

    /// A 1-gram spec over `target`.
    pub fn unigram(target: FeatureExpr) -> Self {
        RuleSpec {
            target,
            k: 1,
            context: None,
        }
    }

    pub fn target(&self) -> &FeatureExpr {
        &self.target
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn context(&self) -> Option<&FeatureExpr> {
        self.context.as_ref()
    }

    /// Minimum corpus arity both expressions require.
    pub fn min_arity(&self) -> usize {
        let target = self.target.min_arity();
        match &self.context {
            Some(ctx) => target.max(ctx.min_arity()),
            None => target,
        }
    }

    fn check_arity(&self, arity: usize) -> Result<(), RuleError> {
        if self.min_arity() > arity {
            return Err(RuleError::IncompatibleArity {
                required: self.min_arity(),
                arity,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tables {
    Single(ValueHistogram),
    ByContext(BTreeMap<ContextKey, ValueHistogram>),
}

/// A rule spec plus its extracted histogram(s). Immutable once extracted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    spec: RuleSpec,
    tables: Tables,
}

impl Rule {
    /// Count feature values over every k-gram window of the corpus.
    ///
    /// For k = 1 every chord contributes to one histogram. For k >= 2 each
    /// window contributes to the histogram keyed by the context feature
    /// values of its k-1 context chords (oldest first).
    pub fn extract(corpus: &Corpus, spec: &RuleSpec) -> Result<Rule, RuleError> {
        let mut acc = RuleAccumulator::new(spec.clone(), corpus.arity())?;
        for piece in corpus.pieces() {
            acc.add_piece(piece);
        }
        acc.finish()
    }

    pub fn spec(&self) -> &RuleSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    /// The single histogram of a 1-gram rule.
    pub fn histogram(&self) -> Option<&ValueHistogram> {
        match &self.tables {
            Tables::Single(h) => Some(h),
            Tables::ByContext(_) => None,
        }
    }

    /// Context tables of a k-gram rule (k >= 2), in key order.
    pub fn contexts(&self) -> impl Iterator<Item = (&ContextKey, &ValueHistogram)> {
        match &self.tables {
            Tables::Single(_) => None,
            Tables::ByContext(map) => Some(map.iter()),
        }
        .into_iter()
        .flatten()
    }

    /// The histogram selected by `context`: the single table for k = 1
    /// (context must be `None`), or the table of the given context tuple.
    pub fn table(&self, context: Option<&ContextKey>) -> Result<&ValueHistogram, RuleError> {
        match (&self.tables, context) {
            (Tables::Single(h), None) => Ok(h),
            (Tables::Single(_), Some(_)) => Err(RuleError::ContextForbidden),
            (Tables::ByContext(_), None) => Err(RuleError::ContextRequired),
            (Tables::ByContext(map), Some(key)) => map
                .get(key)
                .ok_or_else(|| RuleError::UnknownContext(key.to_string())),
        }
    }

    /// Total number of observations across all tables; equals the number
    /// of k-gram windows in the extracted corpus.
    pub fn observation_count(&self) -> u64 {
        match &self.tables {
            Tables::Single(h) => h.total(),
            Tables::ByContext(map) => map.values().map(Histogram::total).sum(),
        }
    }

    /// Histogram over context tuples, each counted by its table total.
    /// Errors on 1-gram rules.
    pub fn context_marginal(&self) -> Result<Histogram<ContextKey>, RuleError> {
        match &self.tables {
            Tables::Single(_) => Err(RuleError::NotConditional),
            Tables::ByContext(map) => Ok(map
                .iter()
                .map(|(key, hist)| (key.clone(), hist.total()))
                .collect()),
        }
    }

    /// Canonical rule file text; inverse of [`Rule::parse`].
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("feature: ");
        out.push_str(&self.spec.target.to_string());
        out.push('\n');
        out.push_str("gram: ");
        out.push_str(&self.spec.k.to_string());
        out.push('\n');
        match &self.tables {
            Tables::Single(hist) => push_histogram(&mut out, hist),
            Tables::ByContext(map) => {
                let context = self.spec.context.as_ref().expect("k >= 2 has a context");
                out.push_str("context-feature: ");
                out.push_str(&context.to_string());
                out.push('\n');
                let mut blocks: Vec<(String, &ValueHistogram)> = map
                    .iter()
                    .map(|(key, hist)| (key.to_string(), hist))
                    .collect();
                blocks.sort_by(|a, b| a.0.cmp(&b.0));
                for (i, (key, hist)) in blocks.iter().enumerate() {
                    if i > 0 {
                        out.push('\n');
                    }
                    out.push_str("context: ");
                    out.push_str(key);
                    out.push('\n');
                    push_histogram(&mut out, hist);
                }
            }
        }
        out
    }

    /// Parse a rule file. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Rule, RuleError> {
        RuleParser::new(text).parse()
    }
}

impl core::str::FromStr for Rule {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::parse(s)
    }
}

/// Histogram lines sorted by descending count, ties by serialized value.
fn sorted_lines(hist: &ValueHistogram) -> Vec<(String, u64)> {
    let mut lines: Vec<(String, u64)> = hist
        .iter()
        .map(|(value, count)| (value.to_string(), count))
        .collect();
    lines.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    lines
}

fn push_histogram(out: &mut String, hist: &ValueHistogram) {
    for (value, count) in sorted_lines(hist) {
        out.push_str(&value);
        out.push('\t');
        out.push_str(&count.to_string());
        out.push('\n');
    }
}

/// Incremental per-piece extraction; merging accumulators is value-wise
/// count addition, so piece grouping and order do not affect the result.
pub struct RuleAccumulator {
    spec: RuleSpec,
    tables: Tables,
}

impl RuleAccumulator {
    pub fn new(spec: RuleSpec, arity: usize) -> Result<Self, RuleError> {
        spec.check_arity(arity)?;
        let tables = if spec.k == 1 {
            Tables::Single(Histogram::new())
        } else {
            Tables::ByContext(BTreeMap::new())
        };
        Ok(RuleAccumulator { spec, tables })
    }

    pub fn spec(&self) -> &RuleSpec {
        &self.spec
    }

    /// Count every k-gram window of `piece`. The piece must have the arity
    /// the accumulator was created with.
    pub fn add_piece(&mut self, piece: &Piece) {
        let k = self.spec.k;
        for window in piece.kgram_windows(k) {
            let value = self
                .spec
                .target
                .evaluate(window.target)
                .expect("arity checked at construction");
            match &mut self.tables {
                Tables::Single(hist) => hist.increment(value),
                Tables::ByContext(map) => {
                    let context = self.spec.context.as_ref().expect("k >= 2 has a context");
                    let key = ContextKey(
                        window
                            .context
                            .iter()
                            .map(|chord| {
                                context
                                    .evaluate(chord)
                                    .expect("arity checked at construction")
                            })
                            .collect(),
                    );
                    map.entry(key).or_insert_with(Histogram::new).increment(value);
                }
            }
        }
    }

    /// Merge another accumulator of the same spec into this one.
    /// Panics if the specs differ.
    pub fn merge(&mut self, other: RuleAccumulator) {
        assert!(self.spec == other.spec, "cannot merge differing rule specs");
        match (&mut self.tables, other.tables) {
            (Tables::Single(a), Tables::Single(b)) => a.merge(b),
            (Tables::ByContext(a), Tables::ByContext(b)) => {
                for (key, hist) in b {
                    match a.get_mut(&key) {
                        Some(existing) => existing.merge(hist),
                        None => {
                            a.insert(key, hist);
                        }
                    }
                }
            }
            _ => unreachable!("table shape determined by spec"),
        }
    }

    /// Finish extraction; errors with `NoObservations` if nothing counted.
    pub fn finish(self) -> Result<Rule, RuleError> {
        let empty = match &self.tables {
            Tables::Single(h) => h.is_empty(),
            Tables::ByContext(map) => map.is_empty(),
        };
        if empty {
            return Err(RuleError::NoObservations);
        }
        Ok(Rule {
            spec: self.spec,
            tables: self.tables,
        })
    }
}

struct RuleParser<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> RuleParser<'a> {
    fn new(text: &'a str) -> Self {
        RuleParser {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    fn line_no(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, message: impl Into<String>) -> RuleError {
        self.error_at(self.line_no(), message)
    }

    fn error_at(&self, line: usize, message: impl Into<String>) -> RuleError {
        RuleError::Parse {
            line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Option<&'a str> {
        let line = self.lines.get(self.pos).copied();
        if line.is_some() {
            self.pos += 1;
        }
        line
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).copied()
    }

    /// Consume a `prefix`-led header line, returning its line number and
    /// the remainder after the prefix.
    fn expect_header(&mut self, prefix: &str) -> Result<(usize, &'a str), RuleError> {
        let line_no = self.line_no();
        let line = self
            .peek()
            .ok_or_else(|| self.error(format_missing(prefix)))?;
        let rest = line
            .strip_prefix(prefix)
            .ok_or_else(|| self.error(format_missing(prefix)))?;
        self.next_line();
        Ok((line_no, rest))
    }

    fn parse(mut self) -> Result<Rule, RuleError> {
        let (feature_line, raw_target) = self.expect_header("feature: ")?;
        let target: FeatureExpr = raw_target
            .parse()
            .map_err(|e: FeatureError| self.error_at(feature_line, e.to_string()))?;
        let k: usize = {
            let (gram_line, raw) = self.expect_header("gram: ")?;
            match raw.parse() {
                Ok(k) if k >= 1 => k,
                _ => {
                    return Err(
                        self.error_at(gram_line, "gram order must be a positive integer")
                    )
                }
            }
        };

        if k == 1 {
            let hist = self.histogram_block()?;
            if hist.is_empty() {
                return Err(self.error("histogram has no entries"));
            }
            self.expect_eof()?;
            return Ok(Rule {
                spec: RuleSpec {
                    target,
                    k,
                    context: None,
                },
                tables: Tables::Single(hist),
            });
        }

        let (ctx_line, raw_context) = self.expect_header("context-feature: ")?;
        let context: FeatureExpr = raw_context
            .parse()
            .map_err(|e: FeatureError| self.error_at(ctx_line, e.to_string()))?;
        let mut map: BTreeMap<ContextKey, ValueHistogram> = BTreeMap::new();
        loop {
            // skip blank separator lines between blocks
            while matches!(self.peek(), Some(l) if l.is_empty()) {
                self.next_line();
            }
            if self.peek().is_none() {
                break;
            }
            let (key_line, raw_key) = self.expect_header("context: ")?;
            let key: ContextKey = raw_key
                .parse()
                .map_err(|e: FeatureError| self.error_at(key_line, e.to_string()))?;
            if key.len() != k - 1 {
                return Err(self.error_at(
                    key_line,
                    alloc::format!(
                        "context tuple has {} values, expected {}",
                        key.len(),
                        k - 1
                    ),
                ));
            }
            let hist = self.histogram_block()?;
            if hist.is_empty() {
                return Err(self.error("context block has no histogram entries"));
            }
            if map.insert(key, hist).is_some() {
                return Err(self.error_at(key_line, "duplicate context tuple"));
            }
        }
        if map.is_empty() {
            return Err(self.error("rule has no context blocks"));
        }
        Ok(Rule {
            spec: RuleSpec {
                target,
                k,
                context: Some(context),
            },
            tables: Tables::ByContext(map),
        })
    }

    /// Consume `value TAB count` lines until a blank line, a `context: `
    /// header, or EOF.
    fn histogram_block(&mut self) -> Result<ValueHistogram, RuleError> {
        let mut hist = ValueHistogram::new();
        while let Some(line) = self.peek() {
            if line.is_empty() || line.starts_with("context: ") {
                break;
            }
            let (raw_value, raw_count) = line
                .split_once('\t')
                .ok_or_else(|| self.error("expected `value<TAB>count`"))?;
            let value: FeatureValue = raw_value
                .parse()
                .map_err(|e: FeatureError| self.error(e.to_string()))?;
            let count: u64 = raw_count
                .parse()
                .map_err(|_| self.error(alloc::format!("non-integer count `{raw_count}`")))?;
            if count == 0 {
                return Err(self.error("zero count"));
            }
            if hist.count(&value) > 0 {
                return Err(self.error(alloc::format!("duplicate value line `{raw_value}`")));
            }
            hist.add(value, count);
            self.next_line();
        }
        Ok(hist)
    }

    fn expect_eof(&mut self) -> Result<(), RuleError> {
        while let Some(line) = self.next_line() {
            if !line.is_empty() {
                self.pos -= 1;
                return Err(self.error("unexpected content after histogram"));
            }
        }
        Ok(())
    }
}

fn format_missing(prefix: &str) -> String {
    let name = prefix.trim_end_matches(": ");
    alloc::format!("expected `{name}:` header")
}

/// Errors from building, extracting, or parsing rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleError {
    /// The corpus has no k-gram window for the requested gram order.
    NoObservations,
    /// The spec's window indices exceed the corpus arity.
    IncompatibleArity { required: usize, arity: usize },
    /// k >= 2 without a context feature.
    ContextRequired,
    /// Context supplied where none applies (k = 1).
    ContextForbidden,
    /// Gram order zero.
    InvalidGram,
    /// `context_marginal` on a 1-gram rule.
    NotConditional,
    /// Lookup of a context tuple the rule never observed.
    UnknownContext(String),
    /// Rule file parse error with a 1-based line number.
    Parse { line: usize, message: String },
}

impl fmt::Display for RuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleError::NoObservations => write!(f, "no observations"),
            RuleError::IncompatibleArity { required, arity } => write!(
                f,
                "feature requires arity {required} but the corpus has {arity} voices"
            ),
            RuleError::ContextRequired => write!(f, "context required"),
            RuleError::ContextForbidden => write!(f, "context not applicable to a 1-gram rule"),
            RuleError::InvalidGram => write!(f, "gram order must be at least 1"),
            RuleError::NotConditional => {
                write!(f, "context marginal requires a rule with gram order >= 2")
            }
            RuleError::UnknownContext(key) => write!(f, "unknown context `{key}`"),
            RuleError::Parse { line, message } => {
                write!(f, "rule file line {line}: {message}")
            }
        }
    }
}

impl core::error::Error for RuleError {}
