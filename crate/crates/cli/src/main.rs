use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use finsent_core::corpus::{load_headlines, Dataset, HeadlineFormat};
use finsent_core::eval::{
    cross_validate, evaluate, grid_sweep, ScoredPair, SweepGrid, DEFAULT_FOLDS,
};
use finsent_core::pipeline::{FittedPipeline, PipelineConfig};
use finsent_core::synth;

#[derive(Parser)]
#[command(
    name = "finsent",
    version,
    about = "Sentiment score regression for financial headlines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a pipeline on scored headlines and write a model bundle.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Overrides the pipeline seed and every nested seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score headlines with a model bundle.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare predictions against gold scores, matched by id.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// k-fold cross-validation of one pipeline config.
    Cv {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        /// Seed for the fold shuffle.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate every config of a grid and rank them.
    Sweep {
        /// Grid file: {"configs": [...], "folds": k, "seed": s}.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Ranked JSON table; the text table goes next to it with a .txt extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the synthetic sample corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = synth::DEFAULT_SIZE)]
        size: usize,
        #[arg(long, default_value_t = synth::DEFAULT_SEED)]
        seed: u64,
    },
}

/// Failures reported with exit code 2.
#[derive(Debug)]
struct UserError(String);

impl<E: std::fmt::Display> From<E> for UserError {
    fn from(e: E) -> Self {
        UserError(e.to_string())
    }
}

type CmdResult = Result<(), UserError>;

fn read_text(path: &Path) -> Result<String, UserError> {
    fs::read_to_string(path).map_err(|e| UserError(format!("{}: {e}", path.display())))
}

fn read_dataset(path: &Path) -> Result<Dataset, UserError> {
    let file = File::open(path).map_err(|e| UserError(format!("{}: {e}", path.display())))?;
    load_headlines(BufReader::new(file), HeadlineFormat::Json)
        .map_err(|e| UserError(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| UserError(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Prediction {
    id: String,
    sentiment: f64,
}

fn predictions_json(ids: &[&str], scores: &[f64]) -> String {
    if ids.is_empty() {
        return "[]\n".into();
    }
    let rows: Vec<String> = ids
        .iter()
        .zip(scores)
        .map(|(id, s)| {
            let id = serde_json::to_string(id).expect("string serializes");
            format!("  {{\"id\": {id}, \"sentiment\": {s:.6}}}")
        })
        .collect();
    format!("[\n{}\n]\n", rows.join(",\n"))
}

fn train(config: &Path, data: &Path, model: &Path, seed: Option<u64>) -> CmdResult {
    let mut config = PipelineConfig::from_json(&read_text(config)?)?;
    if let Some(seed) = seed {
        config = config.with_seed(seed);
    }
    let dataset = read_dataset(data)?;
    let pipeline = FittedPipeline::fit(&config, &dataset)?;
    write_text(model, &pipeline.to_bundle_json())?;
    println!(
        "trained {} + {} on {} records, {} features -> {}",
        config.vectorizer_label(),
        config.learner_label(),
        dataset.len(),
        pipeline.feature_dimension(),
        model.display()
    );
    Ok(())
}

fn predict(model: &Path, data: &Path, out: &Path) -> CmdResult {
    let pipeline = FittedPipeline::from_bundle_json(&read_text(model)?)?;
    let dataset = read_dataset(data)?;
    let scores = if dataset.is_empty() {
        Vec::new()
    } else {
        pipeline.predict(&dataset)?
    };
    let ids: Vec<&str> = dataset.iter().map(|r| r.id.as_str()).collect();
    write_text(out, &predictions_json(&ids, &scores))?;
    println!("wrote {} predictions -> {}", scores.len(), out.display());
    Ok(())
}

fn evaluate_files(gold: &Path, pred: &Path, out: Option<&Path>) -> CmdResult {
    let gold_set = read_dataset(gold)?;
    let unscored = gold_set.unscored_ids();
    if !unscored.is_empty() {
        return Err(UserError(format!(
            "gold records without sentiment: {}",
            unscored.join(", ")
        )));
    }
    let preds: Vec<Prediction> = serde_json::from_str(&read_text(pred)?)
        .map_err(|e| UserError(format!("{}: {e}", pred.display())))?;

    let gold_ids: HashSet<&str> = gold_set.iter().map(|r| r.id.as_str()).collect();
    let mut by_id: HashMap<&str, f64> = HashMap::with_capacity(preds.len());
    for p in &preds {
        if !gold_ids.contains(p.id.as_str()) {
            return Err(UserError(format!(
                "prediction id {:?} is not in the gold set",
                p.id
            )));
        }
        if by_id.insert(&p.id, p.sentiment).is_some() {
            return Err(UserError(format!("duplicate prediction id {:?}", p.id)));
        }
    }
    let (mut g, mut p) = (Vec::new(), Vec::new());
    for r in gold_set.iter() {
        if let Some(&score) = by_id.get(r.id.as_str()) {
            g.push(r.sentiment.expect("checked above"));
            p.push(score);
        }
    }
    let report = evaluate(&ScoredPair::new(g, p, gold_set.len())?)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    print!("{json}");
    if let Some(out) = out {
        write_text(out, &json)?;
    }
    Ok(())
}

fn cv(config: &Path, data: &Path, folds: usize, seed: u64, out: Option<&Path>) -> CmdResult {
    let config = PipelineConfig::from_json(&read_text(config)?)?;
    let dataset = read_dataset(data)?;
    let report = cross_validate(&dataset, &config, folds, seed)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    print!("{json}");
    if let Some(out) = out {
        write_text(out, &json)?;
    }
    Ok(())
}

fn sweep(
    grid: &Path,
    data: &Path,
    out: Option<&Path>,
    folds: Option<usize>,
    seed: Option<u64>,
) -> CmdResult {
    let mut grid = SweepGrid::from_json(&read_text(grid)?)?;
    if let Some(k) = folds {
        grid.folds = k;
    }
    if let Some(s) = seed {
        grid.seed = s;
    }
    let dataset = read_dataset(data)?;
    let results = grid_sweep(&dataset, &grid)?;
    let table = results.to_table();
    print!("{table}");
    if let Some(out) = out {
        write_text(out, &(results.to_json_pretty() + "\n"))?;
        write_text(&out.with_extension("txt"), &table)?;
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Train {
            config,
            data,
            model,
            seed,
        } => train(&config, &data, &model, seed),
        Command::Predict { model, data, out } => predict(&model, &data, &out),
        Command::Evaluate { gold, pred, out } => evaluate_files(&gold, &pred, out.as_deref()),
        Command::Cv {
            config,
            data,
            folds,
            seed,
            out,
        } => cv(&config, &data, folds, seed, out.as_deref()),
        Command::Sweep {
            config,
            data,
            out,
            folds,
            seed,
        } => sweep(&config, &data, out.as_deref(), folds, seed),
        Command::Synth { out, size, seed } => {
            let dataset = synth::synthetic_headlines(size, seed)?;
            let mut file =
                File::create(&out).map_err(|e| UserError(format!("{}: {e}", out.display())))?;
            file.write_all(serde_json::to_string_pretty(dataset.records())?.as_bytes())?;
            file.write_all(b"\n")?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(UserError(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        // The panic hook has already printed the message.
        Err(_) => ExitCode::from(1),
    }
}
