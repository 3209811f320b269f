//! File IO, CLI plumbing, and corpus synthesis on top of `cantus-core`.
//!
//! The `cantus` binary exposes five subcommands:
//! - `rule` — extract a histogram rule from a corpus file and render it.
//! - `render` — re-render a saved rule file.
//! - `enumerate` — list every feature expression within given bounds.
//! - `grade` — score answer sheets against a keyword rubric.
//! - `synth` — generate a seeded synthetic corpus.
//!
//! All command logic lives in [`commands`] as plain functions over parsed
//! arguments, so it is testable without spawning the binary.

pub mod commands;
pub mod parallel;
pub mod synth;

pub use commands::{
    cmd_enumerate, cmd_grade, cmd_render, cmd_rule, cmd_synth, CliError, EnumerateArgs, GradeArgs,
    OutputFormat, RenderArgs, RuleArgs, SynthArgs, EXIT_EXTRACTION, EXIT_INPUT,
};
pub use parallel::extract_parallel;
pub use synth::{synth_corpus, SynthConfig, SynthError};
