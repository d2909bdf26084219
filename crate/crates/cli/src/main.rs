use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use evseg_core::harness::{
    ablation_grid, fit, grid_csv, run_experiment, score, score_with_tolerance,
    weight_sweep, CorpusSource, ExperimentSpec,
};
use evseg_core::lstm::ModelFile;
use evseg_core::segmenter::{segment_with, SegmentationResult};
use evseg_core::simgen::{corpus_report, generate_seeded, GeneratorConfig};
use evseg_core::validator::{validate_audited, ValidatorConfig};
use evseg_core::{EventStream, Vocabulary};

/// Activity segmentation of smart-space event streams.
#[derive(Parser)]
#[command(name = "evseg", version)]
struct Cli {
    /// Master seed; overrides every seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment spec (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic corpus.
    Generate {
        #[arg(long)]
        activities: Option<usize>,
    },
    /// Train a model on a whole event log (or a generated corpus).
    Train {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Label boundaries in an event log with a trained model.
    Segment {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        events: PathBuf,
    },
    /// Apply the time-interval validator to a segmentation.
    Validate {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        segmentation: PathBuf,
        #[arg(long)]
        min_length: Option<usize>,
    },
    /// Score predictions against ground truth, or run the full
    /// train/test pipeline when no predictions are given.
    Evaluate {
        #[command(flatten)]
        spec: SpecArgs,
        /// Segmentation JSON to score against `--events`.
        #[arg(long, requires = "events")]
        predicted: Option<PathBuf>,
    },
    /// Augmentation × validator grid.
    Ablate {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// F1 as a function of the boundary target weight.
    SweepWeight {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])]
        weights: Vec<f64>,
    },
}

#[derive(Args)]
struct SpecArgs {
    /// Labeled event log (JSON Lines); defaults to the generator.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Status objects appended to the input, e.g. `people+light`.
    #[arg(long)]
    augmentation: Option<String>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    activities: Option<usize>,
    /// Fixed boundary target weight.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    no_validator: bool,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let base = load_spec(cli.config.as_deref(), cli.seed)?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Generate { activities } => generate(&base, *activities, out),
        Command::Train { spec } => train(&spec.apply(base)?, out),
        Command::Segment { model, events } => segment(model, events, out),
        Command::Validate {
            events,
            segmentation,
            min_length,
        } => validate(&base, events, segmentation, *min_length, out),
        Command::Evaluate { spec, predicted } => match predicted {
            Some(p) => score_file(spec.events.as_deref().expect("clap enforces --events"), p, out),
            None => evaluate(&spec.apply(base)?, out),
        },
        Command::Ablate { spec } => {
            let rows = ablation_grid(&spec.apply(base)?)?;
            fs::write(out.join("ablation.csv"), grid_csv(&rows))?;
            write_json(&out.join("ablation.json"), &rows)?;
            print!("{}", grid_csv(&rows));
            Ok(())
        }
        Command::SweepWeight { spec, weights } => {
            let sweep = weight_sweep(&spec.apply(base)?, weights)?;
            fs::write(out.join("sweep.csv"), sweep.to_csv())?;
            write_json(&out.join("sweep.json"), &sweep)?;
            print!("{}", sweep.to_csv());
            if let Some(w) = sweep.formula_omega {
                println!("# formula omega: {w:.4}");
            }
            Ok(())
        }
    }
}

fn load_spec(path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentSpec> {
    let mut spec: ExperimentSpec = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => ExperimentSpec::default(),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    Ok(spec)
}

impl SpecArgs {
    fn apply(&self, mut spec: ExperimentSpec) -> Result<ExperimentSpec> {
        if let Some(p) = &self.events {
            spec.corpus = CorpusSource::Path {
                path: p.clone(),
                vocabulary: None,
            };
        }
        if let Some(n) = self.activities {
            match &mut spec.corpus {
                CorpusSource::Generator { n_activities, .. } => *n_activities = n,
                CorpusSource::Path { .. } => bail!("--activities applies to generated corpora only"),
            }
        }
        if let Some(a) = &self.augmentation {
            spec.augmentation = a.parse()?;
        }
        if let Some(h) = self.hidden {
            spec.model.hidden = h;
        }
        if let Some(e) = self.epochs {
            spec.training.epochs = e;
        }
        if self.omega.is_some() {
            spec.omega = self.omega;
        }
        if self.no_validator {
            spec.validator = false;
        }
        spec.check()?;
        Ok(spec)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn read_events(path: &Path, vocab: Vocabulary) -> Result<EventStream> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(EventStream::read_jsonl(vocab, BufReader::new(file))?)
}

fn generate(spec: &ExperimentSpec, activities: Option<usize>, out: &Path) -> Result<()> {
    let (config, n) = match &spec.corpus {
        CorpusSource::Generator {
            config,
            n_activities,
        } => (config.clone(), activities.unwrap_or(*n_activities)),
        CorpusSource::Path { .. } => (GeneratorConfig::default(), activities.unwrap_or(436)),
    };
    let config = GeneratorConfig {
        seed: spec.seed,
        ..config
    };
    let corpus = generate_seeded(&Vocabulary::default(), &config, n)?;
    let mut w = BufWriter::new(fs::File::create(out.join("events.jsonl"))?);
    corpus.stream.write_jsonl(&mut w)?;
    w.flush()?;
    write_json(&out.join("activities.json"), &corpus.activities)?;
    let report = corpus_report(&corpus);
    write_json(&out.join("corpus_report.json"), &report)?;
    println!(
        "{} activities, {} events, {} boundaries, mean length {:.2}",
        report.n_activities, report.n_events, report.n_boundaries, report.mean_length
    );
    Ok(())
}

fn train(spec: &ExperimentSpec, out: &Path) -> Result<()> {
    let stream = spec.load_corpus()?;
    let fitted = fit(spec, &stream)?;
    fitted.file.save(&out.join("model.json"))?;
    write_json(
        &out.join("training.json"),
        &serde_json::json!({
            "spec_hash": spec.hash(),
            "seed": spec.seed,
            "omega": fitted.omega,
            "formula_omega": fitted.formula_omega,
            "cost_curve": fitted.cost_curve,
            "validation_f1": fitted.validation_f1,
            "best_epoch": fitted.best_epoch,
        }),
    )?;
    println!("model written to {}", out.join("model.json").display());
    Ok(())
}

fn segment(model_path: &Path, events: &Path, out: &Path) -> Result<()> {
    let file = ModelFile::load(model_path)?;
    let model = file.model()?;
    let meta = &file.meta;
    let stream = read_events(events, Vocabulary::new(&meta.vocabulary)?)?;
    let start = Instant::now();
    let result = segment_with(
        &model,
        &stream,
        meta.augmentation,
        meta.maxima,
        meta.state_timing,
        Default::default(),
    )?;
    let elapsed = start.elapsed();
    write_json(&out.join("segmentation.json"), &result)?;
    write_json(
        &out.join("timing.json"),
        &serde_json::json!({
            "events": stream.len(),
            "seconds": elapsed.as_secs_f64(),
            "events_per_second": stream.len() as f64 / elapsed.as_secs_f64().max(1e-9),
        }),
    )?;
    println!(
        "{} boundaries in {} events ({:.3} s)",
        result.boundaries.len(),
        stream.len(),
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn read_segmentation(path: &Path) -> Result<SegmentationResult> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn validate(
    spec: &ExperimentSpec,
    events: &Path,
    segmentation: &Path,
    min_length: Option<usize>,
    out: &Path,
) -> Result<()> {
    let stream = read_events(events, Vocabulary::default())?;
    let raw = read_segmentation(segmentation)?;
    let config = ValidatorConfig {
        min_activity_length: min_length.unwrap_or(spec.validator_config.min_activity_length),
    };
    config.check()?;
    let outcome = validate_audited(&stream, &raw, &config);
    write_json(&out.join("validated.json"), &outcome.result)?;
    write_json(&out.join("audit.json"), &outcome.audit)?;
    println!(
        "{} raw boundaries -> {} validated",
        raw.boundaries.len(),
        outcome.result.boundaries.len()
    );
    Ok(())
}

fn score_file(events: &Path, predicted: &Path, out: &Path) -> Result<()> {
    let stream = read_events(events, Vocabulary::default())?;
    let truth = stream
        .true_boundaries()
        .context("event log carries no activity labels")?;
    let pred = read_segmentation(predicted)?;
    let metrics = serde_json::json!({
        "exact": score(&pred.boundaries, truth),
        "within_one": score_with_tolerance(&pred.boundaries, truth, 1),
    });
    write_json(&out.join("metrics.json"), &metrics)?;
    println!("{}", serde_json::to_string_pretty(&metrics)?);
    Ok(())
}

fn evaluate(spec: &ExperimentSpec, out: &Path) -> Result<()> {
    let outcome = run_experiment(spec)?;
    outcome.write_artifacts(out)?;
    let r = &outcome.report;
    println!(
        "F1 raw {:.4}, validated {:.4} (omega {:.3}, {} test boundaries)",
        r.raw.f1, r.validated.f1, r.omega, r.validated.n_true
    );
    Ok(())
}
