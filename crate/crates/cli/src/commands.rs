use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lsteeg_core::latent::{
    activation_csv, cumulative_activation, interpolate, interpolation_csv, mads, spectral_activation,
    spectral_csv, temporal_activation, topomap_csv, topomap_svg,
};
use lsteeg_core::model::{self, LsteegModel};
use lsteeg_core::nn::Matrix;
use lsteeg_core::pipeline::{
    attenuation_csv, detect_scores, evaluate_correction, evaluate_psd, fmt_f64, history_csv,
    identity_baseline, roc_auc, roc_csv, scores_csv, select_threshold, sweep, sweep_csv, test_pairs,
    train, MetricReport, TrainMode,
};
use lsteeg_core::synth::{generate_dataset, load_dataset, save_dataset, EpochDataset, Label, Partition};
use lsteeg_core::{Error, Result};
use serde::Serialize;

use crate::config::{self, parse_axis, parse_partition, Resolved, RunConfig};
use crate::{Command, Common};

struct Run {
    cfg: RunConfig,
    out: PathBuf,
}

impl Run {
    fn open(common: &Common) -> Result<Self> {
        let cfg = config::load(common.config.as_deref())?;
        fs::create_dir_all(&common.out)?;
        Ok(Self {
            cfg,
            out: common.out.clone(),
        })
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        Ok(fs::write(self.out.join(name), contents)?)
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    fn finish(&self, command: &str, data: Option<&Path>, checkpoint: Option<&Path>) -> Result<()> {
        let resolved = Resolved {
            command: command.to_string(),
            data: data.map(Path::to_path_buf),
            checkpoint: checkpoint.map(Path::to_path_buf),
            config: self.cfg.clone(),
        };
        self.write_json("resolved_config.json", &resolved)
    }
}

fn override_partition(slot: &mut Partition, flag: &Option<String>) -> Result<()> {
    if let Some(p) = flag {
        *slot = parse_partition(p)?;
    }
    Ok(())
}

fn select(ds: &EpochDataset, partition: Partition, clean_only: bool) -> Result<Vec<Matrix>> {
    let epochs: Vec<Matrix> = ds
        .partition(partition)
        .filter(|r| !clean_only || r.label == Label::Clean)
        .map(|r| r.input.clone())
        .collect();
    if epochs.is_empty() {
        return Err(Error::Config(format!("{partition:?} partition has no usable epochs")));
    }
    Ok(epochs)
}

/// Copies the dataset's epoch shape into the model section.
fn fit_model_to(cfg: &mut RunConfig, ds: &EpochDataset, seed: u64) {
    let (nc, nt) = ds.epoch_shape();
    cfg.model.n_channels = nc;
    cfg.model.n_samples = nt;
    cfg.model.rng_seed = seed;
    cfg.train.seed = seed;
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            common,
            seed,
            subjects,
            seconds,
        } => {
            let mut run = Run::open(&common)?;
            run.cfg.seed = Some(seed);
            if let Some(n) = subjects {
                run.cfg.synth.n_subjects = n;
            }
            if let Some(s) = seconds {
                run.cfg.synth.seconds_per_subject = s;
            }
            let ds = generate_dataset(&run.cfg.synth, seed)?;
            save_dataset(&ds, run.out.join("dataset.lsds"))?;
            run.finish("synth", None, None)
        }
        Command::Train {
            common,
            seed,
            data,
            mode,
            max_epochs,
            lr,
            n_latent,
        } => {
            let mut run = Run::open(&common)?;
            let ds = load_dataset(&data)?;
            run.cfg.seed = Some(seed);
            fit_model_to(&mut run.cfg, &ds, seed);
            match mode.as_deref() {
                None => {}
                Some("detection") => run.cfg.train.mode = TrainMode::Detection,
                Some("correction") => run.cfg.train.mode = TrainMode::Correction,
                Some(m) => return Err(Error::Usage(format!("unknown mode {m:?} (detection or correction)"))),
            }
            if let Some(e) = max_epochs {
                run.cfg.train.max_epochs = e;
            }
            if let Some(lr) = lr {
                run.cfg.train.lr = lr;
            }
            if let Some(n) = n_latent {
                run.cfg.model.n_latent = n;
            }
            let untrained = LsteegModel::build(&run.cfg.model)?;
            let (trained, history) = train(&untrained, &ds, &run.cfg.train)?;
            model::save(&trained, run.out.join("model.lstg"))?;
            run.write("history.csv", history_csv(&history))?;
            let report = MetricReport {
                history: Some(history),
                ..Default::default()
            };
            run.write_json("report.json", &report)?;
            run.write_json("summary.json", &report.summary())?;
            run.finish("train", Some(&data), None)
        }
        Command::Detect {
            common,
            ckpt,
            data,
            partition,
        } => {
            let mut run = Run::open(&common)?;
            override_partition(&mut run.cfg.detect.partition, &partition)?;
            let model = model::load(&ckpt)?;
            let ds = load_dataset(&data)?;
            let records: Vec<_> = ds.partition(run.cfg.detect.partition).collect();
            if records.is_empty() {
                return Err(Error::Config(format!("{:?} partition has no epochs", run.cfg.detect.partition)));
            }
            let inputs: Vec<Matrix> = records.iter().map(|r| r.input.clone()).collect();
            let labels: Vec<Label> = records.iter().map(|r| r.label).collect();
            let scores = detect_scores(&model, &inputs)?;
            run.write("scores.csv", scores_csv(&scores, &labels))?;
            let roc = roc_auc(&scores, &labels)?;
            let threshold = select_threshold(&roc, run.cfg.detect.threshold)?;
            run.write("roc.csv", roc_csv(&roc))?;
            let report = MetricReport {
                roc: Some(roc),
                threshold: Some(threshold),
                ..Default::default()
            };
            run.write_json("report.json", &report)?;
            run.write_json("summary.json", &report.summary())?;
            run.finish("detect", Some(&data), Some(&ckpt))
        }
        Command::Correct {
            common,
            ckpt,
            data,
            partition,
        } => {
            let mut run = Run::open(&common)?;
            override_partition(&mut run.cfg.correct.partition, &partition)?;
            let model = model::load(&ckpt)?;
            let ds = load_dataset(&data)?;
            let pairs = test_pairs(&ds, run.cfg.correct.partition);
            let corrected = evaluate_correction(&model, &pairs)?;
            let identity = identity_baseline(&pairs)?;
            let mut out = ds.clone();
            for r in &mut out.records {
                r.input = model.reconstruct(&r.input)?;
            }
            save_dataset(&out, run.out.join("corrected.lsds"))?;
            let mut csv = String::from("index,rmse_model,rmse_identity\n");
            for (i, (m, id)) in corrected.per_epoch.iter().zip(&identity.per_epoch).enumerate() {
                let _ = writeln!(csv, "{i},{},{}", fmt_f64(*m), fmt_f64(*id));
            }
            run.write("rmse.csv", csv)?;
            run.write_json(
                "correction.json",
                &serde_json::json!({ "model": corrected, "identity": identity }),
            )?;
            let report = MetricReport {
                test_rmse: Some(corrected),
                ..Default::default()
            };
            run.write_json("summary.json", &report.summary())?;
            run.finish("correct", Some(&data), Some(&ckpt))
        }
        Command::AnalyzeLatent {
            common,
            ckpt,
            data,
            partition,
            mads: k,
            steps,
        } => {
            let mut run = Run::open(&common)?;
            override_partition(&mut run.cfg.analyze.partition, &partition)?;
            if let Some(k) = k {
                run.cfg.analyze.mads = k;
            }
            if let Some(s) = steps {
                run.cfg.analyze.steps = s;
            }
            let a = run.cfg.analyze.clone();
            let model = model::load(&ckpt)?;
            let ds = load_dataset(&data)?;
            let epochs = select(&ds, a.partition, a.clean_only)?;

            let summary = cumulative_activation(&model, &epochs)?;
            let top = mads(&summary, a.mads)?;
            run.write("activation.csv", activation_csv(&summary))?;
            run.write_json("mads.json", &top)?;

            let map = spectral_activation(&model, &epochs, ds.sample_rate, &run.cfg.bands)?;
            run.write("spectral.csv", spectral_csv(&map, &ds.channels)?)?;
            run.write("topomap.csv", topomap_csv(&map, &top, &ds.channels)?)?;
            for &j in &top {
                for (b, band) in map.bands.iter().enumerate() {
                    let title = format!("dim {j} {:?}", band.name);
                    let svg = topomap_svg(map.maps[j].row(b), &ds.channels, &title)?;
                    run.write(&format!("topomap_{j}_{:?}.svg", band.name).to_lowercase(), svg)?;
                }
            }

            for &j in a.temporal_dims.as_ref().unwrap_or(&top) {
                let t = temporal_activation(&model, &epochs, j)?;
                let mut csv = String::from("channel,sample,value\n");
                for (c, label) in ds.channels.iter().enumerate() {
                    for (k, v) in t.alpha.row(c).iter().enumerate() {
                        let _ = writeln!(csv, "{label},{k},{}", fmt_f64(*v));
                    }
                }
                run.write(&format!("temporal_{j}.csv"), csv)?;
            }

            let [ia, ib] = a.pair;
            let (xa, xb) = match (epochs.get(ia), epochs.get(ib)) {
                (Some(x), Some(y)) => (x, y),
                _ => {
                    return Err(Error::Config(format!(
                        "interpolation pair ({ia}, {ib}) outside {} analyzed epochs",
                        epochs.len()
                    )))
                }
            };
            let path = interpolate(&model, xa, xb, a.steps)?;
            run.write("interpolation.csv", interpolation_csv(&path)?)?;
            run.finish("analyze-latent", Some(&data), Some(&ckpt))
        }
        Command::Sweep {
            common,
            seed,
            data,
            axis,
            values,
            max_epochs,
        } => {
            let mut run = Run::open(&common)?;
            let seed = seed.or(run.cfg.seed).unwrap_or(0);
            run.cfg.seed = Some(seed);
            if let Some(a) = axis {
                run.cfg.sweep.axis = parse_axis(&a)?;
            }
            if let Some(v) = values {
                run.cfg.sweep.values = v;
            }
            if let Some(e) = max_epochs {
                run.cfg.train.max_epochs = e;
            }
            let ds = match &data {
                Some(p) => load_dataset(p)?,
                None => generate_dataset(&run.cfg.synth, seed)?,
            };
            fit_model_to(&mut run.cfg, &ds, seed);
            let rows = sweep(run.cfg.sweep.axis, &run.cfg.sweep.values, &run.cfg.model, &run.cfg.train, &ds)?;
            run.write("sweep.csv", sweep_csv(run.cfg.sweep.axis, &rows))?;
            run.write_json("sweep.json", &rows)?;
            run.finish("sweep", data.as_deref(), None)
        }
        Command::EvalPsd {
            common,
            ckpt,
            data,
            partition,
        } => {
            let mut run = Run::open(&common)?;
            override_partition(&mut run.cfg.psd.partition, &partition)?;
            let model = model::load(&ckpt)?;
            let ds = load_dataset(&data)?;
            let epochs = select(&ds, run.cfg.psd.partition, run.cfg.psd.clean_only)?;
            let curve = evaluate_psd(&model, &epochs, ds.sample_rate)?;
            run.write("attenuation.csv", attenuation_csv(&curve))?;
            let report = MetricReport {
                attenuation: Some(curve),
                ..Default::default()
            };
            run.write_json("report.json", &report)?;
            run.finish("eval-psd", Some(&data), Some(&ckpt))
        }
    }
}
