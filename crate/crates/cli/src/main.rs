//! `i-spear`: synthesize a corpus, extract features, analyze them with linear
//! mixed models and evaluate emotional vs. non-emotional classifiers.

mod analyze;
mod evaluate;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ispear::corpus::{self, SynthConfig};
use ispear::dsp::{self, EndpointConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub(crate) fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "i-spear", version, about = "Speech-emotion feature analysis and classification pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic isolated-word corpus (WAV files plus manifest.csv).
    Synth(SynthArgs),
    /// Extract amplitude, duration and wavelet features into a CSV table.
    Extract(ExtractArgs),
    /// Test each feature for an emotion effect with linear mixed models.
    Analyze(analyze::AnalyzeArgs),
    /// Cross-validate SVM and sigmoid-neuron classifiers.
    Evaluate(evaluate::EvaluateArgs),
    /// Check Discrete Emotion Scale questionnaires for successful elicitation.
    ValidateDes(DesArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Number of speakers, overriding the config file [default: 38]
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    subjects: Option<u32>,
    /// Words per speaker and emotion, overriding the config file [default: 30]
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    words: Option<u32>,
    /// Root seed for all random draws.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// TOML file with generator settings (see configs/synth_default.toml).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub(crate) struct EndpointArgs {
    /// Analysis frame length in seconds.
    #[arg(long, default_value_t = 0.025)]
    frame_len: f64,
    /// Frame hop in seconds.
    #[arg(long, default_value_t = 0.010)]
    hop: f64,
    /// Frame energy threshold relative to the loudest frame.
    #[arg(long, default_value_t = 0.01)]
    rel_threshold: f64,
    /// Consecutive frames above threshold that mark the onset.
    #[arg(long, default_value_t = 3)]
    min_onset_frames: usize,
    /// Frames kept after the last frame above threshold.
    #[arg(long, default_value_t = 5)]
    hangover_frames: usize,
}

impl From<&EndpointArgs> for EndpointConfig {
    fn from(a: &EndpointArgs) -> Self {
        EndpointConfig {
            frame_len: a.frame_len,
            hop: a.hop,
            rel_threshold: a.rel_threshold,
            min_onset_frames: a.min_onset_frames,
            hangover_frames: a.hangover_frames,
        }
    }
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Corpus manifest (path,subject_id,gender,word,emotion).
    #[arg(long)]
    manifest: PathBuf,
    /// Output feature CSV.
    #[arg(long)]
    out: PathBuf,
    /// Require a complete subjects x words x emotions design.
    #[arg(long)]
    strict_shape: bool,
    #[command(flatten)]
    endpoint: EndpointArgs,
}

#[derive(Args, Debug)]
struct DesArgs {
    /// DES CSV (subject_id,phase,targeted_emotion,s01..s16).
    #[arg(long)]
    des: PathBuf,
    /// Output CSV of verdicts.
    #[arg(long)]
    out: PathBuf,
    /// Significance level for both ANOVA conditions.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Validate each participant separately instead of pooling by targeted emotion.
    #[arg(long)]
    per_subject: bool,
}

pub(crate) fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p)
            .map_err(|e| runtime(format!("cannot create {}: {e}", p.display()))),
        _ => Ok(()),
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<SynthConfig>(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => SynthConfig::default(),
    };
    if let Some(s) = args.subjects {
        cfg.subjects = s as usize;
    }
    if let Some(w) = args.words {
        cfg.words = w as usize;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let manifest = corpus::synth_corpus(&cfg, args.seed, &args.out).map_err(runtime)?;
    eprintln!(
        "wrote {} utterances to {}",
        manifest.records.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_extract(args: &ExtractArgs) -> Result<(), CliError> {
    let cfg = EndpointConfig::from(&args.endpoint);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let manifest = corpus::load_manifest(&args.manifest, args.strict_shape).map_err(runtime)?;
    let report = dsp::extract_features(&manifest, &cfg).map_err(runtime)?;
    for f in &report.failures {
        eprintln!("record {} ({}): {}", f.index + 1, f.path.display(), f.error);
    }
    ensure_parent(&args.out)?;
    dsp::write_features_csv(&report.rows, &args.out).map_err(runtime)?;
    eprintln!(
        "extracted {} of {} records ({} failed, {} zero-padded for the DWT) -> {}",
        report.rows.len(),
        manifest.records.len(),
        report.failures.len(),
        report.padded_count(),
        args.out.display()
    );
    Ok(())
}

fn cmd_validate_des(args: &DesArgs) -> Result<(), CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage("--alpha must lie in (0, 1)".into()));
    }
    let records = corpus::read_des_csv(&args.des).map_err(runtime)?;
    let (pre, post): (Vec<_>, Vec<_>) = records
        .into_iter()
        .partition(|r| r.phase == corpus::DesPhase::Pre);
    let mut out = String::from("group,condition1_f,condition1_p,condition2_f,condition2_p,valid\n");
    let mut line = |group: &str, v: &corpus::ValidationVerdict| {
        use ispear::format::sig9;
        out.push_str(&format!(
            "{group},{},{},{},{},{}\n",
            sig9(v.condition1_f),
            sig9(v.condition1_p),
            sig9(v.condition2_f),
            sig9(v.condition2_p),
            v.valid
        ));
    };
    let mut invalid = 0;
    if args.per_subject {
        for (s, v) in corpus::des_validate_per_subject(&pre, &post, args.alpha).map_err(runtime)? {
            invalid += usize::from(!v.valid);
            line(&s, &v);
        }
    } else {
        for e in corpus::Emotion::ALL {
            if !pre.iter().any(|r| r.targeted_emotion == e) {
                continue;
            }
            let v = corpus::des_validate(&pre, &post, e, args.alpha).map_err(runtime)?;
            invalid += usize::from(!v.valid);
            line(e.as_str(), &v);
        }
    }
    write_file(&args.out, &out)?;
    eprintln!("{invalid} group(s) failed validation -> {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Analyze(a) => analyze::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::ValidateDes(a) => cmd_validate_des(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
