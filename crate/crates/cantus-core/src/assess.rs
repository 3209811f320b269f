//! Keyword-rubric grading of free-text rule interpretations.
//!
//! A rubric lists, per rule, ordered concept groups of keyword phrases and
//! a per-rule points cap (default 2). An answer earns one point per group
//! whose phrases match, capped. Matching is word-bounded phrase containment
//! after normalization; no stemming or fuzzy matching, so grades are
//! deterministic and auditable.
//!
//! Rubric file format:
//!
//! ```text
//! # comment
//! [rule 1]
//! group: voice crossing | crossed voices
//! group: soprano above alto
//! cap: 2
//! ```
//!
//! Answer sheet format: a `student: <id>` first line, then `[rule <id>]`
//! sections whose following lines (until the next section) are the answer
//! text.
//!
//! Report format: tab-separated `student TAB rule TAB points` lines, a
//! `student TAB TOTAL TAB total` line per student, then a blank line and the
//! cohort bucket table.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

/// Default per-rule points cap.
pub const DEFAULT_CAP: u32 = 2;

/// Lowercase the text, replace every non-alphanumeric character with a
/// space, collapse space runs, and trim.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(c.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// One rubric entry: concept groups of keyword phrases plus a points cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RubricRule {
    id: String,
    /// Normalized phrases, one inner vec per concept group.
    groups: Vec<Vec<String>>,
    cap: u32,
}

impl RubricRule {
    /// Phrases are normalized on construction; a phrase that normalizes to
    /// the empty string is rejected, as is an empty group.
    pub fn new<S: AsRef<str>>(
        id: impl Into<String>,
        groups: Vec<Vec<S>>,
        cap: u32,
    ) -> Result<Self, AssessError> {
        let id = id.into();
        let mut normalized_groups = Vec::with_capacity(groups.len());
        for group in groups {
            if group.is_empty() {
                return Err(AssessError::EmptyGroup { rule: id });
            }
            let mut phrases = Vec::with_capacity(group.len());
            for phrase in group {
                let normalized = normalize(phrase.as_ref());
                if normalized.is_empty() {
                    return Err(AssessError::EmptyPhrase { rule: id });
                }
                phrases.push(normalized);
            }
            normalized_groups.push(phrases);
        }
        Ok(RubricRule {
            id,
            groups: normalized_groups,
            cap,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }
}

/// A graded rubric: uniquely-identified rules in presentation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rubric {
    rules: Vec<RubricRule>,
}

impl Rubric {
    pub fn new(rules: Vec<RubricRule>) -> Result<Self, AssessError> {
        if rules.is_empty() {
            return Err(AssessError::EmptyRubric);
        }
        let mut seen = BTreeSet::new();
        for rule in &rules {
            if !seen.insert(rule.id.clone()) {
                return Err(AssessError::DuplicateRule {
                    id: rule.id.clone(),
                });
            }
        }
        Ok(Rubric { rules })
    }

    /// Parse the rubric file format. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self, AssessError> {
        struct Section {
            id: String,
            groups: Vec<Vec<String>>,
            cap: Option<u32>,
        }
        let mut sections: Vec<Section> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if trimmed.starts_with('[') {
                let id = parse_section_header(trimmed).ok_or_else(|| AssessError::Parse {
                    line,
                    message: format!("malformed section header `{trimmed}`"),
                })?;
                sections.push(Section {
                    id,
                    groups: Vec::new(),
                    cap: None,
                });
                continue;
            }
            let section = sections.last_mut().ok_or(AssessError::Parse {
                line,
                message: "expected a `[rule <id>]` section header".into(),
            })?;
            if let Some(rest) = trimmed.strip_prefix("group:") {
                let mut phrases = Vec::new();
                for phrase in rest.split('|') {
                    let normalized = normalize(phrase);
                    if normalized.is_empty() {
                        return Err(AssessError::Parse {
                            line,
                            message: "empty phrase in group".into(),
                        });
                    }
                    phrases.push(normalized);
                }
                section.groups.push(phrases);
            } else if let Some(rest) = trimmed.strip_prefix("cap:") {
                let cap: u32 = rest.trim().parse().map_err(|_| AssessError::Parse {
                    line,
                    message: "cap must be a non-negative integer".into(),
                })?;
                if section.cap.replace(cap).is_some() {
                    return Err(AssessError::Parse {
                        line,
                        message: "duplicate cap for this rule".into(),
                    });
                }
            } else {
                return Err(AssessError::Parse {
                    line,
                    message: format!("unrecognized line `{trimmed}`"),
                });
            }
        }

        let rules = sections
            .into_iter()
            .map(|s| RubricRule {
                id: s.id,
                groups: s.groups,
                cap: s.cap.unwrap_or(DEFAULT_CAP),
            })
            .collect();
        Rubric::new(rules)
    }

    pub fn rules(&self) -> &[RubricRule] {
        &self.rules
    }

    /// Maximum attainable total: the sum of per-rule caps.
    pub fn max_score(&self) -> u32 {
        self.rules.iter().map(|r| r.cap).sum()
    }
}

/// `Some(id)` when `line` is a well-formed `[rule <id>]` header.
fn parse_section_header(line: &str) -> Option<String> {
    let inner = line.strip_prefix('[')?.strip_suffix(']')?;
    let id = inner.strip_prefix("rule ")?.trim();
    (!id.is_empty()).then(|| id.to_string())
}

/// One student's free-text answers keyed by rule id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerSheet {
    student: String,
    answers: Vec<(String, String)>,
}

impl AnswerSheet {
    pub fn new(
        student: impl Into<String>,
        answers: Vec<(String, String)>,
    ) -> Result<Self, AssessError> {
        let mut seen = BTreeSet::new();
        for (id, _) in &answers {
            if !seen.insert(id.clone()) {
                return Err(AssessError::DuplicateRule { id: id.clone() });
            }
        }
        Ok(AnswerSheet {
            student: student.into(),
            answers,
        })
    }

    /// Parse the answer sheet format. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self, AssessError> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or(AssessError::Parse {
            line: 1,
            message: "expected `student: <id>` on the first line".into(),
        })?;
        let student = first
            .strip_prefix("student:")
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or(AssessError::Parse {
                line: 1,
                message: "expected `student: <id>` on the first line".into(),
            })?;

        let mut answers: Vec<(String, String)> = Vec::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            if let Some(id) = parse_section_header(raw.trim()) {
                answers.push((id, String::new()));
                continue;
            }
            match answers.last_mut() {
                Some((_, text)) => {
                    if !text.is_empty() {
                        text.push('\n');
                    }
                    text.push_str(raw);
                }
                None if raw.trim().is_empty() => {}
                None => {
                    return Err(AssessError::Parse {
                        line,
                        message: "expected a `[rule <id>]` section header".into(),
                    });
                }
            }
        }
        AnswerSheet::new(student, answers)
    }

    pub fn student(&self) -> &str {
        &self.student
    }

    pub fn answer(&self, rule_id: &str) -> Option<&str> {
        self.answers
            .iter()
            .find(|(id, _)| id == rule_id)
            .map(|(_, text)| text.as_str())
    }
}

/// One student's graded sheet: per-rule points in rubric order, and total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudentScore {
    pub student: String,
    pub per_rule: Vec<(String, u32)>,
    pub total: u32,
}

/// Does the normalized `phrase` occur in `answer_words` as a contiguous
/// word-bounded subsequence?
fn phrase_matches(answer_words: &[&str], phrase: &str) -> bool {
    let phrase_words: Vec<&str> = phrase.split(' ').collect();
    if phrase_words.is_empty() || answer_words.len() < phrase_words.len() {
        return false;
    }
    answer_words
        .windows(phrase_words.len())
        .any(|w| w == phrase_words.as_slice())
}

/// Grade one sheet against a rubric.
///
/// A concept group matches when any of its phrases occurs in the normalized
/// answer; rule points are the number of matched groups capped at the
/// rule's cap. Missing answers score zero.
pub fn grade(sheet: &AnswerSheet, rubric: &Rubric) -> Result<StudentScore, AssessError> {
    let mut per_rule = Vec::with_capacity(rubric.rules().len());
    let mut total = 0u32;
    for rule in rubric.rules() {
        let points = match sheet.answer(&rule.id) {
            Some(answer) => {
                let normalized = normalize(answer);
                let words: Vec<&str> = normalized.split(' ').filter(|w| !w.is_empty()).collect();
                let matched = rule
                    .groups
                    .iter()
                    .filter(|group| group.iter().any(|p| phrase_matches(&words, p)))
                    .count() as u32;
                matched.min(rule.cap)
            }
            None => 0,
        };
        total += points;
        per_rule.push((rule.id.clone(), points));
    }
    Ok(StudentScore {
        student: sheet.student.clone(),
        per_rule,
        total,
    })
}

/// One cohort bucket: a score-range label and the number of students in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bucket {
    pub label: String,
    pub count: usize,
}

/// Bucket totals into the cohort table: the exact maximum, then decade
/// ranges `[10i, 10(i+1))` down from the maximum, with exact zero split out
/// of the lowest range. The exact-max and exact-zero buckets take
/// precedence over their containing ranges.
pub fn summarize(totals: &[u32], max_score: u32) -> Result<Vec<Bucket>, AssessError> {
    if max_score == 0 {
        return Err(AssessError::MaxScoreZero);
    }
    for &total in totals {
        if total > max_score {
            return Err(AssessError::TotalOutOfRange {
                total,
                max: max_score,
            });
        }
    }

    let top_decade = (max_score - 1) / 10;
    let mut buckets: Vec<(String, usize)> = Vec::new();
    buckets.push((format!("{max_score}"), 0));
    for decade in (0..=top_decade).rev() {
        buckets.push((format!("[{},{})", decade * 10, (decade + 1) * 10), 0));
    }
    buckets.push(("0".to_string(), 0));

    for &total in totals {
        let slot = if total == max_score {
            0
        } else if total == 0 {
            buckets.len() - 1
        } else {
            1 + (top_decade - total / 10) as usize
        };
        buckets[slot].1 += 1;
    }
    Ok(buckets
        .into_iter()
        .map(|(label, count)| Bucket { label, count })
        .collect())
}

/// A cohort report: per-student scores plus the bucket table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreReport {
    scores: Vec<StudentScore>,
    buckets: Vec<Bucket>,
    max_score: u32,
}

impl ScoreReport {
    pub fn new(scores: Vec<StudentScore>, max_score: u32) -> Result<Self, AssessError> {
        let totals: Vec<u32> = scores.iter().map(|s| s.total).collect();
        let buckets = summarize(&totals, max_score)?;
        Ok(ScoreReport {
            scores,
            buckets,
            max_score,
        })
    }

    pub fn scores(&self) -> &[StudentScore] {
        &self.scores
    }

    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    pub fn max_score(&self) -> u32 {
        self.max_score
    }

    /// The tab-separated report text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for score in &self.scores {
            for (rule, points) in &score.per_rule {
                let _ = writeln!(out, "{}\t{rule}\t{points}", score.student);
            }
            let _ = writeln!(out, "{}\tTOTAL\t{}", score.student, score.total);
        }
        out.push('\n');
        for bucket in &self.buckets {
            let _ = writeln!(out, "{}\t{}", bucket.label, bucket.count);
        }
        out
    }
}

/// Errors from rubric/sheet parsing, grading, or summarizing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssessError {
    Parse { line: usize, message: String },
    EmptyRubric,
    DuplicateRule { id: String },
    EmptyGroup { rule: String },
    EmptyPhrase { rule: String },
    MaxScoreZero,
    TotalOutOfRange { total: u32, max: u32 },
}

impl fmt::Display for AssessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssessError::Parse { line, message } => write!(f, "line {line}: {message}"),
            AssessError::EmptyRubric => write!(f, "rubric references no rules"),
            AssessError::DuplicateRule { id } => write!(f, "duplicate rule id `{id}`"),
            AssessError::EmptyGroup { rule } => {
                write!(f, "rule `{rule}` has an empty concept group")
            }
            AssessError::EmptyPhrase { rule } => {
                write!(f, "rule `{rule}` has a phrase that normalizes to nothing")
            }
            AssessError::MaxScoreZero => write!(f, "maximum score must be at least 1"),
            AssessError::TotalOutOfRange { total, max } => {
                write!(f, "total {total} exceeds the maximum score {max}")
            }
        }
    }
}

impl core::error::Error for AssessError {}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("Voice-Crossing!"), "voice crossing");
        assert_eq!(normalize("  Parallel   5ths "), "parallel 5ths");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("---"), "");
        assert_eq!(normalize("A\nB\tC"), "a b c");
    }

    fn rubric_one_rule(groups: Vec<Vec<&str>>) -> Rubric {
        Rubric::new(vec![RubricRule::new("1", groups, DEFAULT_CAP).unwrap()]).unwrap()
    }

    fn sheet(answer: &str) -> AnswerSheet {
        AnswerSheet::new("s", vec![("1".to_string(), answer.to_string())]).unwrap()
    }

    #[test]
    fn grade_matches_phrase_in_answer() {
        let rubric = rubric_one_rule(vec![vec!["voice crossing", "crossed voices"]]);
        let score = grade(
            &sheet("this avoids voice crossing between parts"),
            &rubric,
        )
        .unwrap();
        assert_eq!(score.per_rule, vec![("1".to_string(), 1)]);
        assert_eq!(score.total, 1);
    }

    #[test]
    fn grade_caps_matched_groups() {
        let rubric = rubric_one_rule(vec![
            vec!["voice crossing"],
            vec!["soprano"],
            vec!["bass"],
        ]);
        let score = grade(&sheet("the soprano stays above the bass; no voice crossing"), &rubric)
            .unwrap();
        assert_eq!(score.total, 2); // 3 groups matched, cap 2
    }

    #[test]
    fn grade_empty_or_missing_answer_scores_zero() {
        let rubric = rubric_one_rule(vec![vec!["voice crossing"]]);
        assert_eq!(grade(&sheet(""), &rubric).unwrap().total, 0);
        let no_answers = AnswerSheet::new("s", vec![]).unwrap();
        let score = grade(&no_answers, &rubric).unwrap();
        assert_eq!(score.per_rule, vec![("1".to_string(), 0)]);
        assert_eq!(score.total, 0);
    }

    #[test]
    fn matching_is_word_bounded() {
        let rubric = rubric_one_rule(vec![vec!["voice crossing"]]);
        // "crossings" is not the word "crossing"
        assert_eq!(grade(&sheet("voice crossings happen"), &rubric).unwrap().total, 0);
        assert_eq!(grade(&sheet("no voice-crossing here"), &rubric).unwrap().total, 1);
        // phrase must be contiguous
        assert_eq!(grade(&sheet("voice leading without crossing"), &rubric).unwrap().total, 0);
    }

    #[test]
    fn matching_ignores_case_and_punctuation() {
        let rubric = rubric_one_rule(vec![vec!["parallel fifths"]]);
        assert_eq!(
            grade(&sheet("Avoid PARALLEL-Fifths!"), &rubric).unwrap().total,
            1
        );
    }

    #[test]
    fn grade_ignores_group_and_phrase_order() {
        let a = rubric_one_rule(vec![vec!["alpha", "beta"], vec!["gamma"]]);
        let b = rubric_one_rule(vec![vec!["gamma"], vec!["beta", "alpha"]]);
        let text = sheet("beta and gamma");
        assert_eq!(grade(&text, &a).unwrap().total, grade(&text, &b).unwrap().total);
    }

    #[test]
    fn empty_rubric_is_an_error() {
        assert_eq!(Rubric::new(vec![]).unwrap_err(), AssessError::EmptyRubric);
    }

    #[test]
    fn rubric_parse_golden() {
        let text = "# choral rubric\n\
                    [rule 1]\n\
                    group: voice crossing | crossed voices\n\
                    group: soprano above\n\
                    \n\
                    [rule 2]\n\
                    cap: 1\n\
                    group: parallel fifths\n";
        let rubric = Rubric::parse(text).unwrap();
        assert_eq!(rubric.rules().len(), 2);
        assert_eq!(rubric.rules()[0].id(), "1");
        assert_eq!(rubric.rules()[0].cap(), 2);
        assert_eq!(
            rubric.rules()[0].groups()[0],
            vec!["voice crossing".to_string(), "crossed voices".to_string()]
        );
        assert_eq!(rubric.rules()[1].cap(), 1);
        assert_eq!(rubric.max_score(), 3);
    }

    #[test]
    fn rubric_parse_errors_carry_lines() {
        for (text, expect_line) in [
            ("group: orphan\n", 1),
            ("[rule 1]\nnot a directive\n", 2),
            ("[rule 1]\ngroup: ok\n[rule 1]\ngroup: dup\n", 0), // duplicate id: no line
            ("[rule 1]\ngroup: |\n", 2),
            ("[rule 1]\ncap: x\n", 2),
            ("[rule 1]\ncap: 2\ncap: 2\n", 3),
            ("[rule ]\ngroup: a\n", 1),
        ] {
            match Rubric::parse(text).unwrap_err() {
                AssessError::Parse { line, .. } => assert_eq!(line, expect_line, "{text:?}"),
                AssessError::DuplicateRule { .. } => assert_eq!(expect_line, 0, "{text:?}"),
                other => panic!("unexpected error {other:?} for {text:?}"),
            }
        }
    }

    #[test]
    fn sheet_parse_golden() {
        let text = "student: alice\n\
                    \n\
                    [rule 1]\n\
                    The voices never cross.\n\
                    Soprano stays on top.\n\
                    [rule 3]\n\
                    \n";
        let sheet = AnswerSheet::parse(text).unwrap();
        assert_eq!(sheet.student(), "alice");
        assert_eq!(
            sheet.answer("1"),
            Some("The voices never cross.\nSoprano stays on top.")
        );
        assert_eq!(sheet.answer("3"), Some(""));
        assert_eq!(sheet.answer("2"), None);
    }

    #[test]
    fn sheet_parse_errors() {
        assert!(matches!(
            AnswerSheet::parse("").unwrap_err(),
            AssessError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            AnswerSheet::parse("[rule 1]\ntext\n").unwrap_err(),
            AssessError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            AnswerSheet::parse("student: s\nstray text\n").unwrap_err(),
            AssessError::Parse { line: 2, .. }
        ));
        assert!(matches!(
            AnswerSheet::parse("student: s\n[rule 1]\na\n[rule 1]\nb\n").unwrap_err(),
            AssessError::DuplicateRule { .. }
        ));
    }

    #[test]
    fn summarize_matches_bucket_partition() {
        let buckets = summarize(&[50, 50, 50], 50).unwrap();
        assert_eq!(buckets[0].label, "50");
        assert_eq!(buckets[0].count, 3);
        assert!(buckets[1..].iter().all(|b| b.count == 0));

        let buckets = summarize(&[0], 50).unwrap();
        let zero = buckets.iter().find(|b| b.label == "0").unwrap();
        assert_eq!(zero.count, 1);
        let low = buckets.iter().find(|b| b.label == "[0,10)").unwrap();
        assert_eq!(low.count, 0);

        let buckets = summarize(&[42, 35], 50).unwrap();
        assert_eq!(
            buckets.iter().find(|b| b.label == "[40,50)").unwrap().count,
            1
        );
        assert_eq!(
            buckets.iter().find(|b| b.label == "[30,40)").unwrap().count,
            1
        );
    }

    #[test]
    fn summarize_labels_for_max_fifty() {
        let labels: Vec<String> = summarize(&[], 50)
            .unwrap()
            .into_iter()
            .map(|b| b.label)
            .collect();
        assert_eq!(
            labels,
            vec!["50", "[40,50)", "[30,40)", "[20,30)", "[10,20)", "[0,10)", "0"]
        );
    }

    #[test]
    fn summarize_rejects_out_of_range() {
        assert_eq!(
            summarize(&[51], 50).unwrap_err(),
            AssessError::TotalOutOfRange { total: 51, max: 50 }
        );
        assert_eq!(summarize(&[], 0).unwrap_err(), AssessError::MaxScoreZero);
    }

    #[test]
    fn every_total_falls_in_exactly_one_bucket() {
        for max in [1u32, 7, 10, 23, 50] {
            for total in 0..=max {
                let buckets = summarize(&[total], max).unwrap();
                let populated: usize = buckets.iter().map(|b| b.count).sum();
                assert_eq!(populated, 1, "total {total} of max {max}");
            }
        }
    }

    #[test]
    fn report_text_golden() {
        let scores = vec![
            StudentScore {
                student: "alice".into(),
                per_rule: vec![("1".into(), 2), ("2".into(), 1)],
                total: 3,
            },
            StudentScore {
                student: "bob".into(),
                per_rule: vec![("1".into(), 0), ("2".into(), 0)],
                total: 0,
            },
        ];
        let report = ScoreReport::new(scores, 4).unwrap();
        let expected = "alice\t1\t2\n\
                        alice\t2\t1\n\
                        alice\tTOTAL\t3\n\
                        bob\t1\t0\n\
                        bob\t2\t0\n\
                        bob\tTOTAL\t0\n\
                        \n\
                        4\t0\n\
                        [0,10)\t1\n\
                        0\t1\n";
        assert_eq!(report.to_text(), expected);
    }
}
