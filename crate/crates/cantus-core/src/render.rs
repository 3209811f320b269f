//! Rule rendering: labeled text histograms, standalone SVG bar charts, and
//! qualitative likelihood descriptions.
//!
//! All renderers are pure functions of the rule (and selected context) and
//! produce byte-identical output for identical input. Rows are ordered by
//! descending probability, ties broken by serialized value.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::rules::{ContextKey, Rule, RuleError, ValueHistogram};

/// Width of a full-probability bar in the text renderer.
const TEXT_BAR_COLUMNS: u64 = 40;

/// Qualitative likelihood bands. They partition (0, 1]:
/// almost-always [0.9, 1], usually [0.5, 0.9), sometimes [0.1, 0.5),
/// rarely (0, 0.1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Band {
    AlmostAlways,
    Usually,
    Sometimes,
    Rarely,
}

impl Band {
    /// All bands in decreasing-likelihood order.
    pub const ALL: [Band; 4] = [Band::AlmostAlways, Band::Usually, Band::Sometimes, Band::Rarely];

    /// Band of a non-zero probability.
    pub fn of(p: f64) -> Band {
        if p >= 0.9 {
            Band::AlmostAlways
        } else if p >= 0.5 {
            Band::Usually
        } else if p >= 0.1 {
            Band::Sometimes
        } else {
            Band::Rarely
        }
    }

    /// Machine-readable name.
    pub fn name(&self) -> &'static str {
        match self {
            Band::AlmostAlways => "almost-always",
            Band::Usually => "usually",
            Band::Sometimes => "sometimes",
            Band::Rarely => "rarely",
        }
    }

    /// Sentence-leading label.
    pub fn label(&self) -> &'static str {
        match self {
            Band::AlmostAlways => "Almost always",
            Band::Usually => "Usually",
            Band::Sometimes => "Sometimes",
            Band::Rarely => "Rarely",
        }
    }
}

/// Errors selecting a histogram to render.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RenderError {
    /// The rule is conditional but no context tuple was given.
    MissingContext,
    /// A context tuple was given for a 1-gram rule.
    UnexpectedContext,
    /// The given context tuple is not present in the rule.
    UnknownContext(String),
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::MissingContext => write!(f, "context required"),
            RenderError::UnexpectedContext => {
                write!(f, "context not applicable to a 1-gram rule")
            }
            RenderError::UnknownContext(key) => write!(f, "unknown context `{key}`"),
        }
    }
}

impl core::error::Error for RenderError {}

fn select_table<'a>(
    rule: &'a Rule,
    context: Option<&ContextKey>,
) -> Result<&'a ValueHistogram, RenderError> {
    rule.table(context).map_err(|e| match e {
        RuleError::ContextRequired => RenderError::MissingContext,
        RuleError::ContextForbidden => RenderError::UnexpectedContext,
        RuleError::UnknownContext(key) => RenderError::UnknownContext(key),
        other => unreachable!("table lookup cannot fail with {other:?}"),
    })
}

/// Rows ordered by descending probability, ties by serialized value.
fn sorted_rows(hist: &ValueHistogram) -> Vec<(String, u64)> {
    let mut rows: Vec<(String, u64)> = hist
        .iter()
        .map(|(value, count)| (value.to_string(), count))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows
}

/// `width * count / total`, rounded half up, in exact integer arithmetic.
fn bar_width(count: u64, total: u64, width: u64) -> u64 {
    (2 * width * count + total) / (2 * total)
}

fn header_lines(rule: &Rule, context: Option<&ContextKey>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "feature: {}", rule.spec().target());
    let _ = writeln!(out, "gram: {}", rule.k());
    if let Some(ctx_expr) = rule.spec().context() {
        let _ = writeln!(out, "context-feature: {ctx_expr}");
    }
    if let Some(key) = context {
        let _ = writeln!(out, "context: {key}");
    }
    out
}

/// Render a histogram as text: a header, then one line per value with a
/// `#` bar proportional to probability (40 columns at p = 1, rounded half
/// up) and the probability to three decimals.
///
/// `context` selects the table of a k-gram rule and must be `None` for a
/// 1-gram rule.
pub fn render_text(rule: &Rule, context: Option<&ContextKey>) -> Result<String, RenderError> {
    let hist = select_table(rule, context)?;
    let rows = sorted_rows(hist);
    let value_width = rows.iter().map(|(v, _)| v.len()).max().unwrap_or(0);
    let total = hist.total();

    let mut out = header_lines(rule, context);
    out.push('\n');
    for (value, count) in rows {
        let bars = bar_width(count, total, TEXT_BAR_COLUMNS) as usize;
        let p = count as f64 / total as f64;
        let _ = write!(out, "{value:<value_width$}  ");
        for _ in 0..bars {
            out.push('#');
        }
        let _ = writeln!(out, "  {p:.3}");
    }
    Ok(out)
}

/// Describe a histogram qualitatively: values grouped by likelihood band,
/// bands in decreasing-likelihood order, e.g.
/// `Almost always: 4<3<2<1. Rarely: 4<3<1<2.`
///
/// Only observed values are mentioned, each exactly once.
pub fn describe(rule: &Rule, context: Option<&ContextKey>) -> Result<String, RenderError> {
    let hist = select_table(rule, context)?;
    let rows = sorted_rows(hist);
    let total = hist.total();

    let mut out = String::new();
    for band in Band::ALL {
        let members: Vec<&str> = rows
            .iter()
            .filter(|(_, count)| Band::of(*count as f64 / total as f64) == band)
            .map(|(value, _)| value.as_str())
            .collect();
        if members.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(band.label());
        out.push_str(": ");
        out.push_str(&members.join(", "));
        out.push('.');
    }
    Ok(out)
}

// SVG layout constants (pixels).
const SVG_MARGIN: u64 = 16;
const SVG_CHAR_W: u64 = 8; // monospace estimate at 13px
const SVG_LINE_H: u64 = 20;
const SVG_BAR_MAX: u64 = 400;
const SVG_BAR_H: u64 = 16;
const SVG_ROW_H: u64 = 24;
const SVG_PROB_W: u64 = 56;
const SVG_BAR_FILL: &str = "#336699";
const SVG_AXIS_STROKE: &str = "#333333";

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Render a histogram as a standalone SVG 1.1 bar chart (rect, text, and
/// line elements only): horizontal bars, serialized values as y-labels,
/// probabilities at the bar ends. Deterministic byte output.
pub fn render_svg(rule: &Rule, context: Option<&ContextKey>) -> Result<String, RenderError> {
    let hist = select_table(rule, context)?;
    let rows = sorted_rows(hist);
    let total = hist.total();

    let header = header_lines(rule, context);
    let header_lines: Vec<&str> = header.lines().collect();

    let label_chars = rows.iter().map(|(v, _)| v.len()).max().unwrap_or(1) as u64;
    let label_w = label_chars * SVG_CHAR_W;
    let chart_x = SVG_MARGIN + label_w + 8;
    let header_h = header_lines.len() as u64 * SVG_LINE_H;
    let rows_y = SVG_MARGIN + header_h + 8;
    let width = chart_x + SVG_BAR_MAX + 8 + SVG_PROB_W + SVG_MARGIN;
    let height = rows_y + rows.len() as u64 * SVG_ROW_H + SVG_MARGIN;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );
    for (i, line) in header_lines.iter().enumerate() {
        let y = SVG_MARGIN + (i as u64) * SVG_LINE_H + 13;
        let _ = writeln!(
            out,
            r#"<text x="{SVG_MARGIN}" y="{y}" font-family="monospace" font-size="13">{}</text>"#,
            escape_xml(line)
        );
    }
    for (i, (value, count)) in rows.iter().enumerate() {
        let top = rows_y + i as u64 * SVG_ROW_H;
        let text_y = top + SVG_BAR_H - 3;
        let w = bar_width(*count, total, SVG_BAR_MAX);
        let p = *count as f64 / total as f64;
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{text_y}" font-family="monospace" font-size="13" text-anchor="end">{label}</text>"#,
            x = SVG_MARGIN + label_w,
            label = escape_xml(value)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{chart_x}" y="{top}" width="{w}" height="{SVG_BAR_H}" fill="{SVG_BAR_FILL}"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{text_y}" font-family="monospace" font-size="13">{p:.3}</text>"#,
            x = chart_x + w + 6
        );
    }
    let axis_bottom = rows_y + rows.len() as u64 * SVG_ROW_H;
    let _ = writeln!(
        out,
        r#"<line x1="{chart_x}" y1="{rows_y}" x2="{chart_x}" y2="{axis_bottom}" stroke="{SVG_AXIS_STROKE}" stroke-width="1"/>"#
    );
    out.push_str("</svg>\n");
    Ok(out)
}
