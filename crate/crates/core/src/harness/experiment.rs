use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::{score, score_with_tolerance, Metrics};
use super::split::split;
use crate::encoder::{encode_stream_with, StateTiming, StatusAugmentation};
use crate::error::{Error, Result};
use crate::event::{dataset_stats, DatasetStats, EventStream, Maxima, Vocabulary};
use crate::lstm::{compute_target_weight, train, LstmModel, ModelFile, ModelMeta, TrainingConfig};
use crate::segmenter::{labeled_windows, segment_encoded, Aggregation, SegmentationResult};
use crate::simgen::{generate_seeded, GeneratorConfig};
use crate::validator::{validate_audited, ValidationOutcome, ValidatorConfig};

/// Where the event stream comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusSource {
    /// A JSON-Lines event log; `vocabulary` defaults to the built-in one.
    Path {
        path: PathBuf,
        #[serde(default)]
        vocabulary: Option<PathBuf>,
    },
    Generator {
        #[serde(default)]
        config: GeneratorConfig,
        n_activities: usize,
    },
}

impl Default for CorpusSource {
    fn default() -> Self {
        CorpusSource::Generator {
            config: GeneratorConfig::default(),
            n_activities: 436,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelShape {
    pub hidden: usize,
    pub time_steps: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            hidden: 64,
            time_steps: 60,
        }
    }
}

/// Full description of one experiment. `seed` drives corpus generation,
/// weight initialization and sample shuffling; nested seeds are overwritten
/// by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub corpus: CorpusSource,
    pub augmentation: StatusAugmentation,
    pub model: ModelShape,
    pub training: TrainingConfig,
    /// Fixed boundary target weight; `None` derives it from the training
    /// split's class balance.
    pub omega: Option<f64>,
    /// Take every n-th training window.
    pub train_stride: usize,
    pub validator: bool,
    pub validator_config: ValidatorConfig,
    pub split_fraction: f64,
    /// Tail share of the training events held out to pick the best epoch.
    pub validation_fraction: Option<f64>,
    pub maxima: Maxima,
    pub aggregation: Aggregation,
    pub state_timing: StateTiming,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            corpus: CorpusSource::default(),
            augmentation: StatusAugmentation::NONE,
            model: ModelShape::default(),
            training: TrainingConfig::default(),
            omega: None,
            train_stride: 1,
            validator: true,
            validator_config: ValidatorConfig::default(),
            split_fraction: 0.9,
            validation_fraction: Some(0.1),
            maxima: Maxima::default(),
            aggregation: Aggregation::Mean,
            state_timing: StateTiming::After,
            seed: 0,
        }
    }
}

impl ExperimentSpec {
    /// Short content hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }

    pub fn check(&self) -> Result<()> {
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::InvalidConfig("split fraction must be in (0, 1)".into()));
        }
        if let Some(v) = self.validation_fraction {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidConfig("validation fraction must be in (0, 1)".into()));
            }
        }
        if let Some(w) = self.omega {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidConfig(format!("omega must be >= 0, got {w}")));
            }
        }
        if self.train_stride == 0 {
            return Err(Error::InvalidConfig("train stride must be positive".into()));
        }
        self.validator_config.check()?;
        self.training.check()
    }

    pub fn load_corpus(&self) -> Result<EventStream> {
        match &self.corpus {
            CorpusSource::Path { path, vocabulary } => {
                let vocab = match vocabulary {
                    Some(p) => Vocabulary::from_json(&std::fs::read_to_string(p)?)?,
                    None => Vocabulary::default(),
                };
                let file = std::fs::File::open(path)?;
                EventStream::read_jsonl(vocab, std::io::BufReader::new(file))
            }
            CorpusSource::Generator {
                config,
                n_activities,
            } => {
                let config = GeneratorConfig {
                    seed: self.seed,
                    ..config.clone()
                };
                Ok(generate_seeded(&Vocabulary::default(), &config, *n_activities)?.stream)
            }
        }
    }
}

/// Metrics and bookkeeping of one run; serializes deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec_hash: String,
    pub seed: u64,
    pub augmentation: StatusAugmentation,
    pub omega: f64,
    /// Weight from the class-balance formula on the fitting events.
    pub formula_omega: Option<f64>,
    pub train_stats: DatasetStats,
    pub test_stats: DatasetStats,
    pub raw: Metrics,
    pub validated: Metrics,
    /// ±1-index matching; not part of the headline scores.
    pub raw_within_one: Metrics,
    pub validated_within_one: Metrics,
    /// `validated` when the validator is enabled, otherwise `raw`.
    pub headline: Metrics,
    pub cost_curve: Vec<f64>,
    pub validation_f1: Vec<f64>,
    pub best_epoch: usize,
    pub spec: ExperimentSpec,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub model: ModelFile,
    pub test_stream: EventStream,
    pub raw: SegmentationResult,
    pub validated: ValidationOutcome,
}

impl ExperimentOutcome {
    /// Writes `model.json`, `segmentation.json` and `metrics.json`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.model.save(&dir.join("model.json"))?;
        let seg = serde_json::json!({
            "raw": self.raw,
            "validated": self.validated.result,
            "audit": self.validated.audit,
        });
        std::fs::write(dir.join("segmentation.json"), serde_json::to_string(&seg)?)?;
        std::fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&self.report)?)?;
        Ok(())
    }
}

/// Generate or load, split, train, segment the test half, validate, score.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.check()?;
    let stream = spec.load_corpus().map_err(|e| e.in_stage("corpus"))?;
    run_on_stream(spec, &stream)
}

/// A model trained on one stream, with its training history.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub model: LstmModel,
    pub file: ModelFile,
    pub omega: f64,
    /// Weight from the class-balance formula on the fitting events.
    pub formula_omega: Option<f64>,
    pub cost_curve: Vec<f64>,
    pub validation_f1: Vec<f64>,
    pub best_epoch: usize,
}

/// Trains on all of `stream`, holding out its tail for early stopping when
/// `spec.validation_fraction` is set.
pub fn fit(spec: &ExperimentSpec, stream: &EventStream) -> Result<FittedModel> {
    spec.check()?;
    let (fit, held_out) = match spec.validation_fraction {
        Some(v) => {
            let (a, b) = split(stream, 1.0 - v).map_err(|e| e.in_stage("validation split"))?;
            (a, Some(b))
        }
        None => (stream.clone(), None),
    };

    let formula_omega = compute_target_weight(dataset_stats(&fit)?).ok();
    let omega = spec
        .omega
        .or(formula_omega)
        .ok_or_else(|| Error::NoBoundaries.in_stage("target weight"))?;

    let encode = |s: &EventStream| encode_stream_with(s, spec.augmentation, spec.maxima, spec.state_timing);
    let fit_encoded = encode(&fit).map_err(|e| e.in_stage("encode"))?;
    let fit_labels = fit.boundary_flags().ok_or(Error::MissingGroundTruth)?;
    let samples = labeled_windows(
        &fit_encoded,
        &fit_labels,
        spec.model.time_steps,
        omega,
        spec.train_stride,
    );

    let model = LstmModel::init(
        fit_encoded.width(),
        spec.model.hidden,
        spec.model.time_steps,
        spec.seed,
    )?;
    let training = TrainingConfig {
        omega,
        seed: spec.seed,
        ..spec.training.clone()
    };

    let outcome = match &held_out {
        Some(val) => {
            let val_encoded = encode(val).map_err(|e| e.in_stage("encode"))?;
            let truth = val.true_boundaries().unwrap_or(&[]).to_vec();
            let mut hook = |m: &LstmModel| -> Result<f64> {
                let r = segment_encoded(m, &val_encoded, spec.aggregation)?;
                Ok(score(&r.boundaries, &truth).f1)
            };
            train(model, &samples, &training, Some(&mut hook))
        }
        None => train(model, &samples, &training, None),
    }
    .map_err(|e| e.in_stage("train"))?;

    let file = ModelFile::new(
        &outcome.model,
        ModelMeta {
            omega,
            augmentation: spec.augmentation,
            maxima: spec.maxima,
            state_timing: spec.state_timing,
            vocabulary: stream.vocab().names().to_vec(),
        },
    );
    Ok(FittedModel {
        model: outcome.model,
        file,
        omega,
        formula_omega,
        cost_curve: outcome.cost_curve,
        validation_f1: outcome.validation_f1,
        best_epoch: outcome.best_epoch,
    })
}

/// [`run_experiment`] on an already loaded stream.
pub fn run_on_stream(spec: &ExperimentSpec, stream: &EventStream) -> Result<ExperimentOutcome> {
    spec.check()?;
    let (train_part, test) = split(stream, spec.split_fraction).map_err(|e| e.in_stage("split"))?;
    let fitted = fit(spec, &train_part)?;

    let test_encoded = encode_stream_with(&test, spec.augmentation, spec.maxima, spec.state_timing)
        .map_err(|e| e.in_stage("encode"))?;
    let raw = segment_encoded(&fitted.model, &test_encoded, spec.aggregation)
        .map_err(|e| e.in_stage("segment"))?;
    let validated = validate_audited(&test, &raw, &spec.validator_config);

    let truth = test.true_boundaries().ok_or(Error::MissingGroundTruth)?;
    let raw_m = score(&raw.boundaries, truth);
    let val_m = score(&validated.result.boundaries, truth);
    let report = ExperimentReport {
        spec_hash: spec.hash(),
        seed: spec.seed,
        augmentation: spec.augmentation,
        omega: fitted.omega,
        formula_omega: fitted.formula_omega,
        train_stats: dataset_stats(&train_part)?,
        test_stats: dataset_stats(&test)?,
        raw: raw_m,
        validated: val_m,
        raw_within_one: score_with_tolerance(&raw.boundaries, truth, 1),
        validated_within_one: score_with_tolerance(&validated.result.boundaries, truth, 1),
        headline: if spec.validator { val_m } else { raw_m },
        cost_curve: fitted.cost_curve,
        validation_f1: fitted.validation_f1,
        best_epoch: fitted.best_epoch,
        spec: spec.clone(),
    };
    Ok(ExperimentOutcome {
        report,
        model: fitted.file,
        test_stream: test,
        raw,
        validated,
    })
}

/// Augmentations evaluated by [`ablation_grid`].
pub const ABLATION_AUGMENTATIONS: [&str; 8] = [
    "",
    "people",
    "light",
    "door",
    "seats",
    "people+light",
    "people+door",
    "people+seats",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub augmentation: String,
    pub validator: bool,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub spec_hash: String,
    pub seed: u64,
}

/// Trains one model per augmentation and scores it with and without the
/// validator: 16 rows.
pub fn ablation_grid(base: &ExperimentSpec) -> Result<Vec<GridRow>> {
    let stream = base.load_corpus().map_err(|e| e.in_stage("corpus"))?;
    let mut rows = Vec::with_capacity(2 * ABLATION_AUGMENTATIONS.len());
    for aug in ABLATION_AUGMENTATIONS {
        let spec = ExperimentSpec {
            augmentation: aug.parse()?,
            ..base.clone()
        };
        let out = run_on_stream(&spec, &stream)?;
        for (validator, m) in [(false, out.report.raw), (true, out.report.validated)] {
            let spec = ExperimentSpec {
                validator,
                ..spec.clone()
            };
            rows.push(GridRow {
                augmentation: if aug.is_empty() { "basic".into() } else { aug.into() },
                validator,
                recall: m.recall,
                precision: m.precision,
                f1: m.f1,
                spec_hash: spec.hash(),
                seed: spec.seed,
            });
        }
    }
    Ok(rows)
}

pub fn grid_csv(rows: &[GridRow]) -> String {
    let mut out = String::from("augmentation,validator,recall,precision,f1,spec_hash,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{},{}\n",
            r.augmentation, r.validator, r.recall, r.precision, r.f1, r.spec_hash, r.seed
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub omega: f64,
    pub f1: f64,
    pub raw_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Class-balance weight of the training split, for reference.
    pub formula_omega: Option<f64>,
    pub spec_hash: String,
    pub seed: u64,
}

impl SweepResult {
    /// Plot-ready `omega,f1` pairs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,f1\n");
        for p in &self.points {
            out.push_str(&format!("{},{:.6}\n", p.omega, p.f1));
        }
        out
    }
}

/// One model per target weight, same data and seed.
pub fn weight_sweep(spec: &ExperimentSpec, omegas: &[f64]) -> Result<SweepResult> {
    if let Some(w) = omegas.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidConfig(format!("omega must be >= 0, got {w}")));
    }
    let stream = spec.load_corpus().map_err(|e| e.in_stage("corpus"))?;
    let mut points = Vec::with_capacity(omegas.len());
    let mut formula_omega = None;
    for &omega in omegas {
        let run = ExperimentSpec {
            omega: Some(omega),
            ..spec.clone()
        };
        let out = run_on_stream(&run, &stream)?;
        formula_omega = out.report.formula_omega;
        points.push(SweepPoint {
            omega,
            f1: out.report.headline.f1,
            raw_f1: out.report.raw.f1,
        });
    }
    Ok(SweepResult {
        points,
        formula_omega,
        spec_hash: spec.hash(),
        seed: spec.seed,
    })
}
