//! Command implementations behind the CLI.
//!
//! Every command is a thin composition of library operations: it reads its
//! input files, delegates to `cantus-core` (plus the synth generator), and
//! returns the output text. Writing to `--out` or stdout happens in `main`.
//!
//! Exit codes: 0 success; 1 input, parse, or usage errors; 2 extraction
//! errors such as `no observations`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cantus_core::{
    assess::{self, AnswerSheet, Rubric, ScoreReport},
    describe, render_svg, render_text, ContextKey, Corpus, FeatureError, FeatureExpr, Rule,
    RuleError, RuleSpec,
};

use crate::parallel::extract_parallel;
use crate::synth::{synth_corpus, SynthConfig};

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_EXTRACTION: u8 = 2;

/// An error plus the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<RuleError> for CliError {
    fn from(e: RuleError) -> Self {
        let code = match e {
            RuleError::NoObservations => EXIT_EXTRACTION,
            _ => EXIT_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Format a DSL error with a caret line pointing at the offending column.
fn dsl_error(source: &str, error: FeatureError) -> CliError {
    let mut message = format!("invalid feature `{source}`: {error}");
    if let FeatureError::Syntax { position, .. } = error {
        let _ = write!(message, "\n  {source}\n  {:>width$}", "^", width = position + 1);
    }
    CliError::input(message)
}

fn parse_expr(source: &str) -> Result<FeatureExpr, CliError> {
    source
        .parse::<FeatureExpr>()
        .map_err(|e| dsl_error(source, e))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Svg,
    Rule,
}

#[derive(Debug, Clone)]
pub struct RuleArgs {
    pub corpus: PathBuf,
    pub feature: String,
    pub gram: usize,
    pub context_feature: Option<String>,
    pub format: OutputFormat,
    /// Context tuple selecting the table to render (text/svg of k-gram rules).
    pub at: Option<String>,
    /// Report the dominating peak at this threshold (text format only).
    pub peak: Option<f64>,
    pub threads: usize,
}

/// Extract a rule from a corpus file and render it in the chosen format.
pub fn cmd_rule(args: &RuleArgs) -> Result<String, CliError> {
    let corpus = Corpus::parse(&read_file(&args.corpus)?)
        .map_err(|e| CliError::input(e.to_string()))?;
    let target = parse_expr(&args.feature)?;
    let context_feature = match &args.context_feature {
        Some(source) => Some(parse_expr(source)?),
        None => None,
    };
    let spec = RuleSpec::new(target, args.gram, context_feature)?;
    let rule = extract_parallel(&corpus, &spec, args.threads)?;
    render_rule(&rule, args.format, args.at.as_deref(), args.peak)
}

#[derive(Debug, Clone)]
pub struct RenderArgs {
    pub rule_file: PathBuf,
    pub format: OutputFormat,
    /// Context tuple selecting the table to render.
    pub at: Option<String>,
    pub peak: Option<f64>,
}

/// Re-render a saved rule file.
pub fn cmd_render(args: &RenderArgs) -> Result<String, CliError> {
    let rule = Rule::parse(&read_file(&args.rule_file)?)?;
    render_rule(&rule, args.format, args.at.as_deref(), args.peak)
}

fn render_rule(
    rule: &Rule,
    format: OutputFormat,
    context: Option<&str>,
    peak: Option<f64>,
) -> Result<String, CliError> {
    let key = match context {
        Some(source) => Some(
            source
                .parse::<ContextKey>()
                .map_err(|e| CliError::input(format!("invalid context `{source}`: {e}")))?,
        ),
        None => None,
    };
    if let Some(threshold) = peak {
        if format != OutputFormat::Text {
            return Err(CliError::input("--peak applies to text output only"));
        }
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(CliError::input("peak threshold must be within (0, 1]"));
        }
    }
    match format {
        OutputFormat::Rule => {
            if key.is_some() {
                return Err(CliError::input(
                    "--at applies to text and svg output only",
                ));
            }
            Ok(rule.serialize())
        }
        OutputFormat::Svg => {
            render_svg(rule, key.as_ref()).map_err(|e| CliError::input(e.to_string()))
        }
        OutputFormat::Text => {
            let mut out = render_text(rule, key.as_ref())
                .map_err(|e| CliError::input(e.to_string()))?;
            let sentences =
                describe(rule, key.as_ref()).map_err(|e| CliError::input(e.to_string()))?;
            out.push('\n');
            let _ = writeln!(out, "reading: {sentences}");
            let _ = writeln!(
                out,
                "(bands: almost-always >= 0.90, usually >= 0.50, sometimes >= 0.10, rarely < 0.10)"
            );
            if let Some(threshold) = peak {
                let hist = rule
                    .table(key.as_ref())
                    .expect("render above already selected this table");
                match hist.dominating_peak(threshold) {
                    Some((value, p)) => {
                        let _ = writeln!(out, "peak(threshold={threshold}): {value} {p:.3}");
                    }
                    None => {
                        let _ = writeln!(out, "peak(threshold={threshold}): none");
                    }
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnumerateArgs {
    pub arity: usize,
    pub max_chain: usize,
}

/// List every feature expression for the bounds, one canonical DSL string
/// per line, in enumeration order.
pub fn cmd_enumerate(args: &EnumerateArgs) -> Result<String, CliError> {
    if args.arity == 0 {
        return Err(CliError::input("arity must be at least 1"));
    }
    if args.max_chain == 0 {
        return Err(CliError::input("max chain length must be at least 1"));
    }
    let mut out = String::new();
    for expr in cantus_core::enumerate_features(args.arity, args.max_chain) {
        let _ = writeln!(out, "{expr}");
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct GradeArgs {
    pub rubric: PathBuf,
    pub answers: Vec<PathBuf>,
    pub cap: Option<u32>,
}

/// Grade answer sheets against a rubric and emit the score report.
pub fn cmd_grade(args: &GradeArgs) -> Result<String, CliError> {
    let rubric = Rubric::parse(&read_file(&args.rubric)?)
        .map_err(|e| CliError::input(format!("{}: {e}", args.rubric.display())))?;
    let mut scores = Vec::with_capacity(args.answers.len());
    for path in &args.answers {
        let sheet = AnswerSheet::parse(&read_file(path)?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let score =
            assess::grade(&sheet, &rubric).map_err(|e| CliError::input(e.to_string()))?;
        scores.push(score);
    }
    let max_score = args.cap.unwrap_or_else(|| rubric.max_score());
    let report =
        ScoreReport::new(scores, max_score).map_err(|e| CliError::input(e.to_string()))?;
    Ok(report.to_text())
}

#[derive(Debug, Clone)]
pub struct SynthArgs {
    pub voices: usize,
    pub length: usize,
    pub pieces: usize,
    pub seed: u64,
    pub crossing_rate: f64,
}

/// Generate a synthetic corpus in the corpus text format.
pub fn cmd_synth(args: &SynthArgs) -> Result<String, CliError> {
    let corpus = synth_corpus(&SynthConfig {
        voices: args.voices,
        length: args.length,
        pieces: args.pieces,
        seed: args.seed,
        crossing_rate: args.crossing_rate,
    })
    .map_err(|e| CliError::input(e.to_string()))?;
    Ok(corpus.format())
}
