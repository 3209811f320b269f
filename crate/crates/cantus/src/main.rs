use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cantus::commands::{self, CliError, EXIT_INPUT};

#[derive(Parser)]
#[command(
    name = "cantus",
    about = "Voice-leading rule extraction and rubric grading for multi-voice corpora",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Svg,
    Rule,
}

impl From<Format> for commands::OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => commands::OutputFormat::Text,
            Format::Svg => commands::OutputFormat::Svg,
            Format::Rule => commands::OutputFormat::Rule,
        }
    }
}

#[derive(Args)]
struct OutputOpts {
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a histogram rule from a corpus file.
    Rule {
        /// Corpus file in the chord-slice text format.
        corpus: PathBuf,
        /// Target feature, e.g. "window[1,2,3,4] |> order".
        #[arg(long)]
        feature: String,
        /// Gram order: 1 for unconditional, k >= 2 conditions on the
        /// previous k-1 chords.
        #[arg(long, default_value_t = 1)]
        gram: usize,
        /// Context feature for k >= 2 (defaults to nothing; required).
        #[arg(long)]
        context: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Context tuple selecting the table to render, e.g. "(7)".
        #[arg(long)]
        at: Option<String>,
        /// Also report the dominating peak at this threshold (text only).
        #[arg(long)]
        peak: Option<f64>,
        /// Worker threads for extraction.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Re-render a saved rule file.
    Render {
        rule_file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Context tuple selecting the table to render, e.g. "(7)".
        #[arg(long)]
        at: Option<String>,
        /// Also report the dominating peak at this threshold (text only).
        #[arg(long)]
        peak: Option<f64>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// List every feature expression within the bounds, one per line.
    Enumerate {
        #[arg(long)]
        arity: usize,
        #[arg(long, default_value_t = 1)]
        max_chain: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Grade answer sheets against a keyword rubric.
    Grade {
        /// Rubric file.
        #[arg(long)]
        rubric: PathBuf,
        /// One or more answer sheet files.
        #[arg(long, num_args = 1.., required = true)]
        answers: Vec<PathBuf>,
        /// Override the maximum total used for the bucket table
        /// (defaults to the sum of rubric caps).
        #[arg(long)]
        max_score: Option<u32>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Generate a seeded synthetic corpus.
    Synth {
        #[arg(long, default_value_t = 4)]
        voices: usize,
        /// Chords per piece.
        #[arg(long, default_value_t = 100)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        pieces: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability of one adjacent-voice swap per chord.
        #[arg(long, default_value_t = 0.0)]
        crossing_rate: f64,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn run(command: Command) -> Result<(String, OutputOpts), CliError> {
    match command {
        Command::Rule {
            corpus,
            feature,
            gram,
            context,
            format,
            at,
            peak,
            threads,
            output,
        } => {
            let text = commands::cmd_rule(&commands::RuleArgs {
                corpus,
                feature,
                gram,
                context_feature: context,
                format: format.into(),
                at,
                peak,
                threads,
            })?;
            Ok((text, output))
        }
        Command::Render {
            rule_file,
            format,
            at,
            peak,
            output,
        } => {
            let text = commands::cmd_render(&commands::RenderArgs {
                rule_file,
                format: format.into(),
                at,
                peak,
            })?;
            Ok((text, output))
        }
        Command::Enumerate {
            arity,
            max_chain,
            output,
        } => {
            let text = commands::cmd_enumerate(&commands::EnumerateArgs { arity, max_chain })?;
            Ok((text, output))
        }
        Command::Grade {
            rubric,
            answers,
            max_score,
            output,
        } => {
            let text = commands::cmd_grade(&commands::GradeArgs {
                rubric,
                answers,
                cap: max_score,
            })?;
            Ok((text, output))
        }
        Command::Synth {
            voices,
            length,
            pieces,
            seed,
            crossing_rate,
            output,
        } => {
            let text = commands::cmd_synth(&commands::SynthArgs {
                voices,
                length,
                pieces,
                seed,
                crossing_rate,
            })?;
            Ok((text, output))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version print to stdout and succeed; usage errors are
            // input errors
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_INPUT)
            };
        }
    };
    match run(cli.command) {
        Ok((text, output)) => match output.out {
            Some(path) => {
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_INPUT);
                }
                ExitCode::SUCCESS
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(text.as_bytes()).is_err() {
                    return ExitCode::from(EXIT_INPUT);
                }
                ExitCode::SUCCESS
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
