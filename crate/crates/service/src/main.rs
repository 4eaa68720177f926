use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use confab::dialogue::DialogueRules;
use confab::feedback::HmmModel;
use confab::trainer::{
    agreement, aggregate_labels, bin_marks, fit, parse_frame_file, parse_label_file,
    LabeledSequence, DEFAULT_BIN_MS, DEFAULT_MIN_RATERS,
};
use confab_service::hub::Hub;
use confab_service::record::DEFAULT_DATA_DIR;
use confab_service::{
    replay, simulate, DataDir, ModelSource, Script, ServerMessage, SessionConfig, DATA_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "confab", version, about = "Conversation practice with nonverbal feedback")]
struct Cli {
    /// Where session records live.
    #[arg(long, global = true, env = DATA_DIR_ENV, default_value = DEFAULT_DATA_DIR)]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the websocket server.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Trained feedback model (JSON). Defaults to the built-in demo model.
        #[arg(long)]
        models: Option<PathBuf>,
        /// Directory with the dialogue rule files. Defaults to the shipped rules.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Session config (TOML) applied to every new session.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a whole session against a scripted user and record it.
    Simulate {
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print only the summary.
        #[arg(long)]
        quiet: bool,
    },
    /// Fit a feedback model from rater marks and recorded features.
    Train {
        /// Marks as `rater,cue,start_ms,end_ms`; repeat once per recording.
        #[arg(long, required = true)]
        labels: Vec<PathBuf>,
        /// Feature frames as JSON lines; one per `--labels`, in the same order.
        #[arg(long, required = true)]
        features: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BIN_MS)]
        bin_ms: u64,
        /// Raters who must mark a bin for it to count.
        #[arg(long, default_value_t = DEFAULT_MIN_RATERS)]
        min_raters: usize,
    },
    /// Inter-rater agreement of a mark file.
    Alpha {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BIN_MS)]
        bin_ms: u64,
        /// Length of the recording; defaults to the last mark's end.
        #[arg(long)]
        span_ms: Option<u64>,
        /// Raters who took part but marked nothing.
        #[arg(long, value_delimiter = ',')]
        raters: Vec<String>,
    },
    /// Print the report of a recorded session.
    Summarize {
        #[arg(long)]
        session: String,
    },
    /// Re-run a recorded session and check the result is byte-identical.
    Replay {
        #[arg(long)]
        session: String,
        #[arg(long)]
        rules: Option<PathBuf>,
    },
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let data = DataDir::new(cli.data_dir);
    let result = match cli.command {
        Command::Serve {
            port,
            host,
            models,
            rules,
            config,
        } => serve(data, &host, port, models, rules.as_deref(), config.as_deref()),
        Command::Simulate {
            script,
            seed,
            models,
            rules,
            config,
            quiet,
        } => run_simulation(&data, &script, seed, models, rules.as_deref(), config.as_deref(), quiet),
        Command::Train {
            labels,
            features,
            out,
            bin_ms,
            min_raters,
        } => train(&labels, &features, &out, bin_ms, min_raters),
        Command::Alpha {
            labels,
            bin_ms,
            span_ms,
            raters,
        } => alpha(&labels, bin_ms, span_ms, &raters),
        Command::Summarize { session } => summarize(&data, &session),
        Command::Replay { session, rules } => check_replay(&data, &session, rules.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_rules(dir: Option<&Path>) -> Result<Arc<DialogueRules>, Box<dyn std::error::Error>> {
    Ok(Arc::new(match dir {
        Some(dir) => DialogueRules::load_dir(dir)?,
        None => DialogueRules::shipped(),
    }))
}

fn load_config(path: Option<&Path>, models: Option<PathBuf>) -> Result<SessionConfig, Box<dyn std::error::Error>> {
    let mut config = match path {
        Some(p) => toml::from_str(&std::fs::read_to_string(p)?)?,
        None => SessionConfig::default(),
    };
    if let Some(m) = models {
        config.model = ModelSource::File(m);
    }
    config.validate()?;
    Ok(config)
}

fn serve(
    data: DataDir,
    host: &str,
    port: u16,
    models: Option<PathBuf>,
    rules: Option<&Path>,
    config: Option<&Path>,
) -> CliResult {
    let rules = load_rules(rules)?;
    let config = load_config(config, models)?;
    let model = Arc::new(confab_service::load_model(&config.model)?);
    let addr: SocketAddr = format!("{host}:{port}").parse()?;
    let hub = Arc::new(Hub::new(rules, model, config, Some(data)));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(confab_service::server::serve(hub, addr))?;
    Ok(())
}

fn run_simulation(
    data: &DataDir,
    script_path: &Path,
    seed: u64,
    models: Option<PathBuf>,
    rules: Option<&Path>,
    config: Option<&Path>,
    quiet: bool,
) -> CliResult {
    let script = Script::load(script_path)?;
    let rules = load_rules(rules)?;
    let mut config = load_config(config, models)?;
    config.seed = seed;
    let model = Arc::new(confab_service::load_model(&config.model)?);
    let id = format!("sim-{}-{seed}", script.name);
    let out = data.replace(&id)?;
    let (outcome, mut out) = simulate(&id, &script, config, rules, model, seed, out)?;
    out.flush()?;

    let mut stdout = std::io::stdout().lock();
    if !quiet {
        writeln!(stdout, "[{}] agent: {}", clock(0), outcome.opening)?;
        for turn in &outcome.turns {
            writeln!(stdout, "[{}] user:  {}", clock(turn.user_t_ms), turn.user_text)?;
            writeln!(stdout, "[{}] agent: {}", clock(turn.agent_t_ms), turn.agent_text)?;
        }
        writeln!(stdout)?;
    }
    if let Some(ServerMessage::Summary { report, .. }) = outcome.outputs.last() {
        write!(stdout, "{report}")?;
    }
    writeln!(stdout, "topics: {}", outcome.topics.join(", "))?;
    writeln!(stdout, "record: {}", data.path_for(&id).display())?;
    Ok(())
}

fn clock(ms: u64) -> String {
    format!("{:02}:{:02}", ms / 60_000, ms / 1000 % 60)
}

fn train(
    labels: &[PathBuf],
    features: &[PathBuf],
    out: &Path,
    bin_ms: u64,
    min_raters: usize,
) -> CliResult {
    if labels.len() != features.len() {
        return Err(format!(
            "{} label files but {} feature files",
            labels.len(),
            features.len()
        )
        .into());
    }
    let mut sequences = Vec::new();
    for (label_path, frame_path) in labels.iter().zip(features) {
        let marks = parse_label_file(&std::fs::read_to_string(label_path)?)?;
        let frames = parse_frame_file(&std::fs::read_to_string(frame_path)?)?;
        let last_frame = frames.last().map_or(0, |f| f.t_ms + 1);
        let span = marks.iter().map(|m| m.end_ms).max().unwrap_or(0).max(last_frame);
        let matrix = bin_marks(&marks, &[], bin_ms, span)?;
        let track = aggregate_labels(&matrix, min_raters)?;
        let report = agreement(&matrix)?;
        println!(
            "{}: {} frames, {} raters, pooled alpha {:.3}",
            label_path.display(),
            frames.len(),
            matrix.rater_count(),
            report.pooled
        );
        sequences.push(LabeledSequence::from_track(frames, &track)?);
    }
    let model: HmmModel = fit(&sequences)?;
    model.save(out)?;
    println!("model written to {}", out.display());
    Ok(())
}

fn alpha(labels: &Path, bin_ms: u64, span_ms: Option<u64>, raters: &[String]) -> CliResult {
    let marks = parse_label_file(&std::fs::read_to_string(labels)?)?;
    let span = span_ms.unwrap_or_else(|| marks.iter().map(|m| m.end_ms).max().unwrap_or(0));
    let matrix = bin_marks(&marks, raters, bin_ms, span)?;
    let report = agreement(&matrix)?;
    let show = |a: Option<f64>| a.map_or_else(|| "n/a".to_string(), |a| format!("{a:.4}"));
    for (cue, a) in &report.per_cue {
        println!("{:<16} {}", cue.label(), show(*a));
    }
    println!("{:<16} {}", "pooled", show(Some(report.pooled)));
    println!("{:<16} {}", "mean of cues", show(report.mean_of_cues));
    Ok(())
}

fn summarize(data: &DataDir, id: &str) -> CliResult {
    let record = data.load(id)?;
    let Some(ServerMessage::Summary {
        segments, report, ..
    }) = record.summary()
    else {
        return Err(format!("session {id} has not ended").into());
    };
    println!("session {id}");
    print!("{report}");
    for seg in segments {
        println!(
            "segment {} (from {}): reminders {}",
            seg.index,
            clock(seg.start_ms),
            seg.summary.reminders
        );
    }
    Ok(())
}

fn check_replay(data: &DataDir, id: &str, rules: Option<&Path>) -> CliResult {
    let original = data.read_bytes(id)?;
    let record = data.load(id)?;
    let replayed = replay(&record, load_rules(rules)?)?;
    if replayed == original {
        println!("session {id}: replay identical ({} bytes)", original.len());
        Ok(())
    } else {
        Err(format!("session {id}: replay differs from the record").into())
    }
}
