//! Experiment runner behind the `lasenn` binary.
//!
//! Each subcommand reads the effective configuration, consumes artifacts
//! produced by earlier subcommands from the output directory, and writes
//! its own artifacts under fixed names. All CSV output is deterministic;
//! the only timestamp lives in `manifest.txt`.
//!
//! Models are always evaluated through their checkpoint representation:
//! training rounds parameters to the stored 32-bit form before any
//! accuracy is measured, so a pipeline run in one process produces the
//! same numbers as one that reloads `model.lsnm` from disk.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::adversarial::{attack_dataset, AttackConfig, AttackKind};
use crate::classifier::{
    generate_synthetic, load_model, permute_labels, read_model, save_model, train, write_model,
    Dataset, MlpClassifier, SyntheticSpec, TrainConfig, TrainTrace,
};
use crate::combiner::{predict_batch, write_predictions_csv, BatchSummary, LasennConfig};
use crate::config::{derive_seed, ExperimentConfig};
use crate::diagnostics::{
    density_report, projection_histogram_from_predictions, write_density_csv,
    write_histogram_csv, write_histogram_svg,
};
use crate::error::{Error, Result};
use crate::knn::{KnnIndex, Metric};
use crate::tensor::{load_labels, load_tensor, save_labels, save_tensor, LabeledCorpus};
use crate::toymodel::{
    boundary_drift, estimate_nn_blue_prob, write_drift_csv, write_estimate_csv, ToyDistribution,
    ToyModelConfig,
};

pub const SUBCOMMANDS: &[&str] = &[
    "gen-data",
    "train",
    "export-corpus",
    "build-index",
    "predict",
    "sweep",
    "noise-exp",
    "attack-exp",
    "diagnose",
    "toymodel",
];

/// Runs one subcommand. Config problems (including missing input
/// artifacts) surface as [`Error::Config`]; the binary maps those to
/// exit code 2 and everything else to 1.
pub fn run(command: &str, config: &ExperimentConfig) -> Result<()> {
    let out = PathBuf::from(config.get("out")?);
    fs::create_dir_all(&out)?;
    match command {
        "gen-data" => cmd_gen_data(config, &out),
        "train" => cmd_train(config, &out),
        "export-corpus" => cmd_export_corpus(config, &out),
        "build-index" => cmd_build_index(config, &out),
        "predict" => cmd_predict(config, &out),
        "sweep" => cmd_sweep(config, &out, None),
        "noise-exp" => cmd_noise_exp(config, &out),
        "attack-exp" => cmd_attack_exp(config, &out),
        "diagnose" => cmd_diagnose(config, &out),
        "toymodel" => cmd_toymodel(config, &out),
        other => Err(Error::Config(format!(
            "unknown subcommand '{other}'; expected one of {}",
            SUBCOMMANDS.join(", ")
        ))),
    }?;
    write_manifest(command, config, &out)
}

fn write_manifest(command: &str, config: &ExperimentConfig, out: &Path) -> Result<()> {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut file = BufWriter::new(File::create(out.join("manifest.txt"))?);
    writeln!(file, "command={command}")?;
    writeln!(file, "version={}", env!("CARGO_PKG_VERSION"))?;
    writeln!(file, "config_hash={}", config.hash())?;
    writeln!(file, "master_seed={}", config.get("master_seed")?)?;
    writeln!(file, "seeds={}", config.get("seeds")?)?;
    writeln!(file, "timestamp_unix={timestamp}")?;
    file.flush()?;
    Ok(())
}

fn require(path: &Path, producer: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "missing artifact {}; run `{producer}` first",
            path.display()
        )))
    }
}

fn synthetic_spec(config: &ExperimentConfig) -> Result<SyntheticSpec> {
    let master: u64 = config.get_parsed("master_seed")?;
    let spec = SyntheticSpec {
        num_classes: config.get_parsed("data.num_classes")?,
        samples_per_class: config.get_parsed("data.samples_per_class")?,
        dims: config.get_parsed("data.dims")?,
        cluster_mean_scale: config.get_parsed("data.mean_scale")?,
        cluster_stddev: config.get_parsed("data.stddev")?,
        seed: derive_seed(master, "data"),
    };
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(spec)
}

fn train_config(config: &ExperimentConfig, run_seed: u64) -> Result<TrainConfig> {
    let milestones: Vec<usize> = config.get_list("train.milestones")?;
    let tc = TrainConfig {
        epochs: config.get_parsed("train.epochs")?,
        batch_size: config.get_parsed("train.batch_size")?,
        learning_rate: config.get_parsed("train.learning_rate")?,
        momentum: config.get_parsed("train.momentum")?,
        weight_decay: config.get_parsed("train.weight_decay")?,
        decay_factor: config.get_parsed("train.decay_factor")?,
        milestones: if milestones.is_empty() {
            None
        } else {
            Some(milestones)
        },
        seed: derive_seed(run_seed, "shuffle"),
    };
    tc.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(tc)
}

fn layer_sizes(config: &ExperimentConfig, dims: usize, classes: usize) -> Result<Vec<usize>> {
    let hidden: Vec<usize> = config.get_list("model.hidden")?;
    if hidden.is_empty() {
        return Err(Error::Config("model.hidden must list at least one layer".into()));
    }
    let mut sizes = vec![dims];
    sizes.extend(hidden);
    sizes.push(classes);
    Ok(sizes)
}

fn lasenn_config(config: &ExperimentConfig) -> Result<LasennConfig> {
    let layer: usize = config.get_parsed("lasenn.layer")?;
    let cfg = LasennConfig {
        k: config.get_parsed("lasenn.k")?,
        w_q: config.get_parsed("lasenn.w_q")?,
        metric: config.get("lasenn.metric")?.parse()?,
        layer_index: if layer == 0 { None } else { Some(layer) },
    };
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}

/// Resolves the 1-based hidden-layer index an index/corpus should use.
fn resolve_layer(lasenn: &LasennConfig, model: &MlpClassifier) -> Result<usize> {
    let layer = lasenn.layer_index.unwrap_or_else(|| model.num_hidden_layers());
    if layer < 1 || layer > model.num_hidden_layers() {
        return Err(Error::Config(format!(
            "lasenn.layer {layer} outside 1..={}",
            model.num_hidden_layers()
        )));
    }
    Ok(layer)
}

fn attack_config(
    config: &ExperimentConfig,
    lo: f64,
    hi: f64,
    run_seed: u64,
) -> Result<AttackConfig> {
    let kind: AttackKind = config.get("attack.kind")?.parse()?;
    let epsilon_scale: f64 = config.get_parsed("attack.epsilon_scale")?;
    let step_scale: f64 = config.get_parsed("attack.step_scale")?;
    let epsilon = epsilon_scale * (hi - lo);
    let seed = derive_seed(run_seed, "attack");
    let cfg = match kind {
        AttackKind::Fgsm => AttackConfig::fgsm(epsilon, lo, hi, seed),
        AttackKind::Bia => AttackConfig::bia(
            epsilon,
            step_scale * epsilon,
            config.get_parsed("attack.num_steps")?,
            lo,
            hi,
            seed,
        ),
        AttackKind::Pgd => AttackConfig::pgd(
            epsilon,
            step_scale * epsilon,
            config.get_parsed("attack.num_steps")?,
            config.get_bool("attack.random_start")?,
            lo,
            hi,
            seed,
        ),
    };
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(cfg)
}

/// Trains a fresh model for one run seed and rounds its parameters
/// through the checkpoint encoding.
fn train_for_seed(
    config: &ExperimentConfig,
    data: &Dataset,
    run_seed: u64,
) -> Result<(MlpClassifier, TrainTrace)> {
    let sizes = layer_sizes(config, data.dims(), data.labels.num_classes() as usize)?;
    let mut model = MlpClassifier::random(&sizes, derive_seed(run_seed, "init"))?;
    let trace = train(&mut model, data, &train_config(config, run_seed)?)?;
    let mut bytes = Vec::new();
    write_model(&model, &mut bytes)?;
    let model = read_model(&mut bytes.as_slice())?;
    Ok((model, trace))
}

fn load_dataset(out: &Path, prefix: &str, producer: &str) -> Result<Dataset> {
    let features_path = out.join(format!("{prefix}_features.lsnn"));
    let labels_path = out.join(format!("{prefix}_labels.lsnl"));
    require(&features_path, producer)?;
    require(&labels_path, producer)?;
    Dataset::new(load_tensor(features_path)?, load_labels(labels_path)?)
}

fn load_corpus(out: &Path) -> Result<LabeledCorpus> {
    for name in [
        "corpus_embeddings.lsnn",
        "corpus_outputs.lsnn",
        "corpus_labels.lsnl",
    ] {
        require(&out.join(name), "export-corpus")?;
    }
    LabeledCorpus::new(
        load_tensor(out.join("corpus_embeddings.lsnn"))?,
        load_tensor(out.join("corpus_outputs.lsnn"))?,
        load_labels(out.join("corpus_labels.lsnl"))?,
    )
}

fn first_seed(config: &ExperimentConfig) -> Result<u64> {
    config
        .get_list::<u64>("seeds")?
        .first()
        .copied()
        .ok_or_else(|| Error::Config("seeds list is empty".into()))
}

/// Exports corpus and queries at the resolved layer, builds the index,
/// and runs the batch predictor.
fn evaluate_cell(
    model: &MlpClassifier,
    train_data: &Dataset,
    test_data: &Dataset,
    lasenn: &LasennConfig,
    raw_logits: bool,
) -> Result<BatchSummary> {
    let layer = resolve_layer(lasenn, model)?;
    let corpus = model.export_corpus(train_data, layer, raw_logits)?;
    let index = KnnIndex::build(&corpus.embeddings, lasenn.metric)?;
    let queries = model.export_corpus(test_data, layer, raw_logits)?;
    let (_, summary) = predict_batch(lasenn, &corpus, &index, &queries)?;
    Ok(summary)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn cmd_gen_data(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let spec = synthetic_spec(config)?;
    let (train_data, test_data) = generate_synthetic(&spec)?;
    save_tensor(&train_data.features, out.join("train_features.lsnn"))?;
    save_labels(&train_data.labels, out.join("train_labels.lsnl"))?;
    save_tensor(&test_data.features, out.join("test_features.lsnn"))?;
    save_labels(&test_data.labels, out.join("test_labels.lsnl"))?;
    Ok(())
}

fn cmd_train(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let train_data = load_dataset(out, "train", "gen-data")?;
    let (model, trace) = train_for_seed(config, &train_data, first_seed(config)?)?;
    save_model(&model, out.join("model.lsnm"))?;
    let mut file = BufWriter::new(File::create(out.join("train_trace.csv"))?);
    writeln!(file, "epoch,loss,accuracy")?;
    for (epoch, (loss, acc)) in trace
        .epoch_loss
        .iter()
        .zip(&trace.epoch_accuracy)
        .enumerate()
    {
        writeln!(file, "{epoch},{loss},{acc}")?;
    }
    file.flush()?;
    Ok(())
}

fn cmd_export_corpus(config: &ExperimentConfig, out: &Path) -> Result<()> {
    require(&out.join("model.lsnm"), "train")?;
    let model = load_model(out.join("model.lsnm"))?;
    let train_data = load_dataset(out, "train", "gen-data")?;
    let lasenn = lasenn_config(config)?;
    let layer = resolve_layer(&lasenn, &model)?;
    let corpus = model.export_corpus(
        &train_data,
        layer,
        config.get_bool("lasenn.raw_logits")?,
    )?;
    save_tensor(&corpus.embeddings, out.join("corpus_embeddings.lsnn"))?;
    save_tensor(&corpus.logits, out.join("corpus_outputs.lsnn"))?;
    save_labels(&corpus.labels, out.join("corpus_labels.lsnl"))?;
    Ok(())
}

fn cmd_build_index(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let corpus = load_corpus(out)?;
    let lasenn = lasenn_config(config)?;
    let index = KnnIndex::build(&corpus.embeddings, lasenn.metric)?;
    let mut file = BufWriter::new(File::create(out.join("index_meta.txt"))?);
    writeln!(file, "metric={}", index.metric())?;
    writeln!(file, "rows={}", index.len())?;
    writeln!(file, "dims={}", index.dim())?;
    let excluded: Vec<String> = index.excluded_rows().iter().map(usize::to_string).collect();
    writeln!(file, "excluded_rows={}", excluded.join(","))?;
    file.flush()?;
    Ok(())
}

fn cmd_predict(config: &ExperimentConfig, out: &Path) -> Result<()> {
    require(&out.join("model.lsnm"), "train")?;
    let model = load_model(out.join("model.lsnm"))?;
    let corpus = load_corpus(out)?;
    let test_data = load_dataset(out, "test", "gen-data")?;
    let lasenn = lasenn_config(config)?;
    let layer = resolve_layer(&lasenn, &model)?;
    let index = KnnIndex::build(&corpus.embeddings, lasenn.metric)?;
    let queries = model.export_corpus(
        &test_data,
        layer,
        config.get_bool("lasenn.raw_logits")?,
    )?;
    let (predictions, summary) = predict_batch(&lasenn, &corpus, &index, &queries)?;
    let mut file = BufWriter::new(File::create(out.join("predictions.csv"))?);
    write_predictions_csv(
        &mut file,
        &predictions,
        queries.labels.labels(),
        &summary,
        lasenn.k,
    )?;
    file.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepAxis {
    Wq,
    K,
    MetricAxis,
    Layer,
    Noise,
}

impl SweepAxis {
    fn parse(name: &str) -> Result<Self> {
        match name {
            "w_q" => Ok(SweepAxis::Wq),
            "k" => Ok(SweepAxis::K),
            "metric" => Ok(SweepAxis::MetricAxis),
            "layer" => Ok(SweepAxis::Layer),
            "noise" => Ok(SweepAxis::Noise),
            other => Err(Error::Config(format!(
                "sweep.parameter must be one of w_q, k, metric, layer, noise; got '{other}'"
            ))),
        }
    }
}

/// Shared engine for `sweep` and `noise-exp`. Writes one row per grid
/// value with per-seed mean and sample standard deviation of both
/// accuracies and their difference.
fn cmd_sweep(config: &ExperimentConfig, out: &Path, forced: Option<(SweepAxis, Vec<String>, &str)>) -> Result<()> {
    let (axis, values, file_name) = match forced {
        Some(f) => f,
        None => (
            SweepAxis::parse(config.get("sweep.parameter")?)?,
            config
                .get("sweep.values")?
                .split(',')
                .map(|v| v.trim().to_string())
                .collect(),
            "sweep.csv",
        ),
    };
    if values.is_empty() || values.iter().all(String::is_empty) {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let seeds: Vec<u64> = config.get_list("seeds")?;
    if seeds.is_empty() {
        return Err(Error::Config("seeds list is empty".into()));
    }
    let spec = synthetic_spec(config)?;
    let (train_data, test_data) = generate_synthetic(&spec)?;
    let base_lasenn = lasenn_config(config)?;
    let raw_logits = config.get_bool("lasenn.raw_logits")?;

    // models depend only on the seed except under label noise
    let mut clean_models: Vec<MlpClassifier> = Vec::new();
    if axis != SweepAxis::Noise {
        for &seed in &seeds {
            clean_models.push(train_for_seed(config, &train_data, seed)?.0);
        }
    }

    let mut file = BufWriter::new(File::create(out.join(file_name))?);
    writeln!(
        file,
        "parameter,value,n_seeds,acc_lasenn_mean,acc_lasenn_std,acc_native_mean,acc_native_std,delta_acc_mean,delta_acc_std"
    )?;
    let axis_name = match axis {
        SweepAxis::Wq => "w_q",
        SweepAxis::K => "k",
        SweepAxis::MetricAxis => "metric",
        SweepAxis::Layer => "layer",
        SweepAxis::Noise => "noise",
    };
    for value in &values {
        let mut lasenn = base_lasenn;
        match axis {
            SweepAxis::Wq => {
                lasenn.w_q = value.parse().map_err(|_| {
                    Error::Config(format!("sweep value '{value}' is not a weight"))
                })?;
            }
            SweepAxis::K => {
                lasenn.k = value.parse().map_err(|_| {
                    Error::Config(format!("sweep value '{value}' is not a count"))
                })?;
            }
            SweepAxis::MetricAxis => {
                lasenn.metric = value.parse::<Metric>()?;
            }
            SweepAxis::Layer => {
                let layer: usize = value.parse().map_err(|_| {
                    Error::Config(format!("sweep value '{value}' is not a layer index"))
                })?;
                lasenn.layer_index = if layer == 0 { None } else { Some(layer) };
            }
            SweepAxis::Noise => {}
        }
        lasenn
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;

        let mut acc_lasenn = Vec::with_capacity(seeds.len());
        let mut acc_native = Vec::with_capacity(seeds.len());
        let mut delta = Vec::with_capacity(seeds.len());
        for (i, &seed) in seeds.iter().enumerate() {
            let summary = if axis == SweepAxis::Noise {
                let fraction: f64 = value.parse().map_err(|_| {
                    Error::Config(format!("noise value '{value}' is not a fraction"))
                })?;
                let noisy_labels = permute_labels(
                    &train_data.labels,
                    fraction,
                    derive_seed(seed, "noise"),
                )?;
                let noisy = Dataset::new(train_data.features.clone(), noisy_labels)?;
                let (model, _) = train_for_seed(config, &noisy, seed)?;
                evaluate_cell(&model, &noisy, &test_data, &lasenn, raw_logits)?
            } else {
                evaluate_cell(&clean_models[i], &train_data, &test_data, &lasenn, raw_logits)?
            };
            acc_lasenn.push(summary.acc_lasenn);
            acc_native.push(summary.acc_native);
            delta.push(summary.delta_acc);
        }
        let (lm, ls) = mean_std(&acc_lasenn);
        let (nm, ns) = mean_std(&acc_native);
        let (dm, ds) = mean_std(&delta);
        writeln!(
            file,
            "{axis_name},{value},{},{lm},{ls},{nm},{ns},{dm},{ds}",
            seeds.len()
        )?;
    }
    file.flush()?;
    Ok(())
}

fn cmd_noise_exp(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let values: Vec<String> = config
        .get("noise.fractions")?
        .split(',')
        .map(|v| v.trim().to_string())
        .collect();
    cmd_sweep(config, out, Some((SweepAxis::Noise, values, "noise.csv")))
}

fn cmd_attack_exp(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let seeds: Vec<u64> = config.get_list("seeds")?;
    if seeds.is_empty() {
        return Err(Error::Config("seeds list is empty".into()));
    }
    let spec = synthetic_spec(config)?;
    let (train_data, test_data) = generate_synthetic(&spec)?;
    let lasenn = lasenn_config(config)?;
    let raw_logits = config.get_bool("lasenn.raw_logits")?;
    let (lo_a, hi_a) = train_data.value_range();
    let (lo_b, hi_b) = test_data.value_range();
    let (lo, hi) = (lo_a.min(lo_b) as f64, hi_a.max(hi_b) as f64);

    let mut clean = (Vec::new(), Vec::new(), Vec::new());
    let mut attacked = (Vec::new(), Vec::new(), Vec::new());
    let mut first_attacked: Option<Dataset> = None;
    for &seed in &seeds {
        let (model, _) = train_for_seed(config, &train_data, seed)?;
        let summary = evaluate_cell(&model, &train_data, &test_data, &lasenn, raw_logits)?;
        clean.0.push(summary.acc_lasenn);
        clean.1.push(summary.acc_native);
        clean.2.push(summary.delta_acc);

        let attack_cfg = attack_config(config, lo, hi, seed)?;
        let adversarial = attack_dataset(&model, &test_data, &attack_cfg)?;
        let summary = evaluate_cell(&model, &train_data, &adversarial, &lasenn, raw_logits)?;
        attacked.0.push(summary.acc_lasenn);
        attacked.1.push(summary.acc_native);
        attacked.2.push(summary.delta_acc);
        if first_attacked.is_none() {
            first_attacked = Some(adversarial);
        }
    }
    if let Some(adversarial) = first_attacked {
        save_tensor(&adversarial.features, out.join("attacked_features.lsnn"))?;
    }
    let kind = config.get("attack.kind")?;
    let mut file = BufWriter::new(File::create(out.join("attack.csv"))?);
    writeln!(
        file,
        "condition,kind,n_seeds,acc_lasenn_mean,acc_lasenn_std,acc_native_mean,acc_native_std,delta_acc_mean,delta_acc_std"
    )?;
    for (condition, (al, an, ad)) in [("clean", &clean), ("attacked", &attacked)] {
        let (lm, ls) = mean_std(al);
        let (nm, ns) = mean_std(an);
        let (dm, ds) = mean_std(ad);
        writeln!(
            file,
            "{condition},{kind},{},{lm},{ls},{nm},{ns},{dm},{ds}",
            seeds.len()
        )?;
    }
    file.flush()?;
    Ok(())
}

fn cmd_diagnose(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let spec = synthetic_spec(config)?;
    let (train_data, test_data) = generate_synthetic(&spec)?;
    let (model, _) = train_for_seed(config, &train_data, first_seed(config)?)?;
    let lasenn = lasenn_config(config)?;
    let raw_logits = config.get_bool("lasenn.raw_logits")?;
    let layer = resolve_layer(&lasenn, &model)?;
    let corpus = model.export_corpus(&train_data, layer, raw_logits)?;
    let index = KnnIndex::build(&corpus.embeddings, lasenn.metric)?;
    let queries = model.export_corpus(&test_data, layer, raw_logits)?;

    let report = density_report(&lasenn, &corpus, &index, &queries)?;
    let mut file = BufWriter::new(File::create(out.join("density.csv"))?);
    write_density_csv(&report, &mut file)?;
    file.flush()?;

    let (predictions, _) = predict_batch(&lasenn, &corpus, &index, &queries)?;
    let hist = projection_histogram_from_predictions(
        &queries,
        &predictions,
        config.get_parsed("diagnose.class_a")?,
        config.get_parsed("diagnose.bins")?,
    )?;
    let mut file = BufWriter::new(File::create(out.join("histogram.csv"))?);
    write_histogram_csv(&hist, &mut file)?;
    file.flush()?;
    let mut file = BufWriter::new(File::create(out.join("histogram.svg"))?);
    write_histogram_svg(&hist, &mut file)?;
    file.flush()?;
    Ok(())
}

fn cmd_toymodel(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let master: u64 = config.get_parsed("master_seed")?;
    let distribution: ToyDistribution = config.get("toy.distribution")?.parse()?;
    let c_values: Vec<f64> = config.get_list("toy.c_values")?;
    if c_values.is_empty() {
        return Err(Error::Config("toy.c_values is empty".into()));
    }
    let mut rows = Vec::with_capacity(c_values.len());
    for &c in &c_values {
        let toy = ToyModelConfig {
            distribution,
            c,
            d: config.get_parsed("toy.d")?,
            a: config.get_parsed("toy.a")?,
            w_q: config.get_parsed("toy.w_q")?,
            n: config.get_parsed("toy.n")?,
            trials: config.get_parsed("toy.trials")?,
            seed: derive_seed(master, "toy"),
        };
        toy.validate().map_err(|e| Error::Config(e.to_string()))?;
        let estimate = estimate_nn_blue_prob(&toy)?;
        rows.push((toy, estimate));
    }
    let mut file = BufWriter::new(File::create(out.join("toy_estimate.csv"))?);
    write_estimate_csv(&rows, &mut file)?;
    file.flush()?;

    let n_values: Vec<usize> = config.get_list("drift.n_values")?;
    let num_seeds: usize = config.get_parsed("drift.num_seeds")?;
    let drift_seeds: Vec<u64> = (0..num_seeds)
        .map(|i| derive_seed(master, &format!("drift-{i}")))
        .collect();
    let table = boundary_drift(distribution, &n_values, &drift_seeds)?;
    let mut file = BufWriter::new(File::create(out.join("toy_drift.csv"))?);
    write_drift_csv(&table, &mut file)?;
    file.flush()?;
    Ok(())
}
