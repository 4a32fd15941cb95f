//! `minuteforge` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 empty meeting,
//! 4 embeddings handshake failure. Log verbosity comes from the
//! `MINUTEFORGE_LOG` environment variable (`quiet`, `info` or `debug`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};
use serde_json::json;

use minuteforge::transcript::parse_transcript_bytes;
use minuteforge::{
    evaluate, render, run_pipeline, write_phrase_list, Aggregation, ApConfig, Error, Lexicons,
    LineOrdering, OutputFormat, PipelineConfig, PipelineOutput, Preference,
};

const LOG_ENV: &str = "MINUTEFORGE_LOG";

#[derive(Parser)]
#[command(
    name = "minuteforge",
    version,
    about = "Extractive meeting minutes from transcripts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Produce minutes for one transcript.
    Summarize {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Minutes format.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Destination file; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score a candidate summary against one or more references with ROUGE.
    Evaluate {
        #[arg(long)]
        candidate: PathBuf,
        /// Reference summary; repeat for several references.
        #[arg(long)]
        reference: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Aggregate::Max)]
        aggregation: Aggregate,
        /// Destination file for the JSON report; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Dump phrases, clusters and clustering diagnostics as JSON.
    Inspect {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Destination file for the JSON dump; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the phrase list (JSON Lines) for an embedding exporter.
        #[arg(long)]
        phrases_out: Option<PathBuf>,
    },
    /// Show configuration defaults.
    Config {
        /// Print the built-in lexicons as JSON (a starting point for --lexicons).
        #[arg(long)]
        dump_lexicons: bool,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// Transcript text file.
    #[arg(long)]
    input: PathBuf,
    /// Meeting identifier; defaults to the input file stem.
    #[arg(long)]
    meeting_id: Option<String>,
    /// Precomputed phrase embeddings (JSON Lines); builtin hashing otherwise.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// JSON file overriding some or all of the word lists.
    #[arg(long)]
    lexicons: Option<PathBuf>,
    /// Fraction of clusters kept as minute lines, in (0, 1].
    #[arg(long, default_value_t = minuteforge::minutes::DEFAULT_SELECTION_RATIO)]
    ratio: f64,
    #[arg(long, default_value_t = minuteforge::affinity::DEFAULT_DAMPING)]
    damping: f64,
    #[arg(long, default_value_t = minuteforge::affinity::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    #[arg(long, default_value_t = minuteforge::affinity::DEFAULT_CONVERGENCE_ITERATIONS)]
    convergence_iterations: usize,
    /// Exemplar preference: `median` or a number.
    #[arg(long, default_value = "median", value_parser = parse_preference)]
    preference: Preference,
    /// Seed for similarity jitter; 0 disables jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Longest n-gram averaged into phrase meaningfulness (1 or 3).
    #[arg(long, default_value_t = 3)]
    stfidf_grams: usize,
    /// Phrases shorter than this many tokens are dropped.
    #[arg(long, default_value_t = minuteforge::phrases::DEFAULT_MIN_PHRASE_TOKENS)]
    min_phrase_tokens: usize,
    /// Dimension of builtin hashed embeddings.
    #[arg(long, default_value_t = minuteforge::embedding::DEFAULT_BUILTIN_DIM)]
    dim: usize,
    /// Which phrase position orders the selected lines.
    #[arg(long, value_enum, default_value_t = Ordering::Exemplar)]
    ordering: Ordering,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ordering {
    Exemplar,
    EarliestMember,
}

#[derive(Clone, Copy, ValueEnum)]
enum Aggregate {
    Max,
    Mean,
}

fn parse_preference(s: &str) -> Result<Preference, String> {
    if s.eq_ignore_ascii_case("median") {
        return Ok(Preference::Median);
    }
    s.parse::<f64>()
        .map(Preference::Value)
        .map_err(|_| format!("expected `median` or a number, got {s:?}"))
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::EmptyMeeting => 3,
            Error::Embeddings(_) => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, content).map_err(|e| io_failure(path, e))?;
            info!("wrote {}", path.display());
            Ok(())
        }
        None => match std::io::stdout().lock().write_all(content.as_bytes()) {
            // a closed pipe (`| head`) is the reader's choice, not a failure
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure {
                code: 2,
                message: format!("standard output: {e}"),
            }),
            _ => Ok(()),
        },
    }
}

impl PipelineArgs {
    fn config(&self, format: OutputFormat) -> Result<PipelineConfig, Failure> {
        let lexicons = match &self.lexicons {
            Some(path) => Lexicons::from_path(path)?,
            None => Lexicons::default(),
        };
        let config = PipelineConfig {
            ratio: self.ratio,
            ap: ApConfig {
                damping: self.damping,
                max_iterations: self.max_iterations,
                convergence_iterations: self.convergence_iterations,
                preference: self.preference,
                noise_seed: self.seed,
            },
            embeddings_path: self.embeddings.clone(),
            builtin_dim: self.dim,
            lexicons,
            min_phrase_tokens: self.min_phrase_tokens,
            stfidf_grams: self.stfidf_grams,
            output_format: format,
            ordering: match self.ordering {
                Ordering::Exemplar => LineOrdering::Exemplar,
                Ordering::EarliestMember => LineOrdering::EarliestMember,
            },
        };
        config.validate()?;
        Ok(config)
    }

    fn run(&self, config: &PipelineConfig) -> Result<PipelineOutput, Failure> {
        let bytes = fs::read(&self.input).map_err(|e| io_failure(&self.input, e))?;
        let meeting_id = self.meeting_id.clone().unwrap_or_else(|| {
            self.input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "meeting".into())
        });
        let transcript = parse_transcript_bytes(&bytes, &meeting_id)?;
        info!(
            "{}: {} utterances",
            transcript.meeting_id,
            transcript.utterances.len()
        );
        let out = run_pipeline(&transcript, config)?;
        info!(
            "{} phrases, {} clusters, {} sweeps (converged: {}), {} minute lines",
            out.phrases.len(),
            out.solution.exemplars.len(),
            out.solution.iterations_run,
            out.solution.converged,
            out.minutes.lines.len()
        );
        Ok(out)
    }
}

fn inspect_report(out: &PipelineOutput, config: &PipelineConfig) -> serde_json::Value {
    let selected: Vec<usize> = out.minutes.lines.iter().map(|l| l.phrase_id).collect();
    let meaningfulness: std::collections::HashMap<usize, f64> = out
        .ranked
        .iter()
        .map(|c| (c.exemplar_phrase_id, c.meaningfulness))
        .collect();
    let phrases: Vec<_> = out
        .phrases
        .iter()
        .zip(&out.scores)
        .map(|(p, s)| {
            let exemplar = out.solution.assignment[p.phrase_id];
            json!({
                "phrase_id": p.phrase_id,
                "utterance_index": p.utterance_index,
                "text": p.text(),
                "stfidf": s.stfidf,
                "ngram_count": s.ngram_count,
                "cluster": exemplar,
                "cluster_meaningfulness": meaningfulness[&exemplar],
            })
        })
        .collect();
    let clusters: Vec<_> = out
        .ranked
        .iter()
        .enumerate()
        .map(|(rank, c)| {
            json!({
                "rank": rank,
                "exemplar_phrase_id": c.exemplar_phrase_id,
                "exemplar_text": out.phrases[c.exemplar_phrase_id].text(),
                "member_phrase_ids": c.member_phrase_ids,
                "meaningfulness": c.meaningfulness,
                "selected": selected.iter().any(|&id| c.member_phrase_ids.contains(&id)),
            })
        })
        .collect();
    let sol = &out.solution;
    json!({
        "meeting_id": out.minutes.meeting_id,
        "phrases": phrases,
        "clusters": clusters,
        "affinity_propagation": {
            "damping": config.ap.damping,
            "max_iterations": config.ap.max_iterations,
            "convergence_iterations": config.ap.convergence_iterations,
            "preference": sol.preference,
            "noise_seed": config.ap.noise_seed,
            "iterations_run": sol.iterations_run,
            "converged": sol.converged,
            "exemplar_count": sol.exemplars.len(),
            "net_similarity": sol.net_similarity,
        },
        "embeddings": {
            "source": out.embeddings.source,
            "dim": out.embeddings.dim,
        },
        "minutes": out.minutes,
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Summarize {
            pipeline,
            format,
            output,
        } => {
            let format = match format {
                Format::Text => OutputFormat::Text,
                Format::Json => OutputFormat::Json,
            };
            let config = pipeline.config(format)?;
            let out = pipeline.run(&config)?;
            emit(output.as_deref(), &render(&out.minutes, format))
        }
        Command::Evaluate {
            candidate,
            reference,
            aggregation,
            output,
        } => {
            if reference.is_empty() {
                return Err(Error::NoReferences.into());
            }
            let candidate = read_text(&candidate)?;
            let references = reference
                .iter()
                .map(|p| read_text(p))
                .collect::<Result<Vec<_>, _>>()?;
            let aggregation = match aggregation {
                Aggregate::Max => Aggregation::Max,
                Aggregate::Mean => Aggregation::Mean,
            };
            let report = evaluate(&candidate, &references, aggregation)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            emit(output.as_deref(), &format!("{text}\n"))
        }
        Command::Inspect {
            pipeline,
            output,
            phrases_out,
        } => {
            let config = pipeline.config(OutputFormat::Json)?;
            let out = pipeline.run(&config)?;
            if let Some(path) = &phrases_out {
                let mut buf = Vec::new();
                write_phrase_list(&mut buf, &out.phrases).expect("writing to memory");
                fs::write(path, buf).map_err(|e| io_failure(path, e))?;
                info!("wrote {} phrases to {}", out.phrases.len(), path.display());
            }
            let report = inspect_report(&out, &config);
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            emit(output.as_deref(), &format!("{text}\n"))
        }
        Command::Config { dump_lexicons } => {
            if !dump_lexicons {
                return Err(Failure {
                    code: 2,
                    message: "nothing to do; try `config --dump-lexicons`".into(),
                });
            }
            emit(None, &format!("{}\n", Lexicons::default().to_json()))
        }
    }
}

fn init_logging() {
    let level = match std::env::var(LOG_ENV).as_deref() {
        Ok("quiet") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        _ => LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("minuteforge: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
