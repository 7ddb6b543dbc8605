//! `eend-lab`: every stage of the diarization pipeline behind one binary.
//!
//! All hyperparameters live in a JSON configuration file (`--config`); the
//! command line only carries file locations, the seed override, and the
//! thread cap. Exit codes are part of the contract: 0 on success, 1 when
//! input data is missing or malformed, 2 when the configuration or the
//! invocation itself is wrong.

mod config;
mod gradcheck;
mod smoke;

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eend_core::annotation::Annotation;
use eend_core::encoder::{decide, parameter_count, read_checkpoint, write_checkpoint, Model};
use eend_core::error::{Error, Result};
use eend_core::features::{
    load_wav, logmel, read_feature_archive, write_feature_archive, write_wav, FeatureMatrix,
    Waveform,
};
use eend_core::numerics::Rng;
use eend_core::scoring::{emit_rttm, parse_rttm, score_corpus};
use eend_core::simulator::{augment_mixture, build_pool, corpus_mixture, corpus_stats};
use eend_core::training::{
    average_checkpoints, finetune, finetune_report_tsv, rasterize_labels, train, EvalSequence,
    TrainSequence,
};
use eend_core::turntaking::{compare_corpora, DEFAULT_GAMMA};

use crate::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "eend-lab",
    version,
    about = "Desk-scale end-to-end neural diarization lab",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    /// JSON run configuration; every field is optional.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the seed from the configuration file.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Directory for output artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Caps worker threads; the EEND_LAB_JOBS variable is the fallback.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute log-mel features for wav files into .feat archives.
    Featurize {
        /// 8 kHz mono wav files; each becomes <out>/<stem>.feat.
        #[arg(required = true, value_name = "WAV")]
        wavs: Vec<PathBuf>,
    },
    /// Synthesize two-speaker mixtures from an utterance manifest.
    Simulate {
        /// Tab-separated utterance list: speaker, wav path, duration.
        #[arg(long, value_name = "TSV")]
        manifest: PathBuf,
        /// Number of mixtures to write.
        #[arg(long, default_value_t = 10, value_name = "N")]
        count: u64,
        /// Noise beds for the augmentation stage (enables the sim snr_db set).
        #[arg(long, value_name = "WAV")]
        noise_wav: Vec<PathBuf>,
        /// Impulse responses, required when the sim section sets use_rir.
        #[arg(long, value_name = "WAV")]
        rir_wav: Vec<PathBuf>,
    },
    /// Pooled corpus statistics for an RTTM file.
    Stats {
        #[arg(long, value_name = "RTTM")]
        rttm: PathBuf,
    },
    /// Turn-taking similarity (overlap and silence) between two RTTM corpora.
    Similarity {
        #[arg(long, value_name = "RTTM")]
        rttm_a: PathBuf,
        #[arg(long, value_name = "RTTM")]
        rttm_b: PathBuf,
    },
    /// Train a model on featurized recordings against RTTM references.
    Train {
        /// Directory of .feat archives; stems must match RTTM recording ids.
        #[arg(long, value_name = "DIR")]
        features_dir: PathBuf,
        #[arg(long, value_name = "RTTM")]
        rttm: PathBuf,
    },
    /// Average checkpoints into <out>/averaged.ckpt.
    Average {
        #[arg(required = true, value_name = "CKPT")]
        checkpoints: Vec<PathBuf>,
    },
    /// Run the optimizer grid from a base checkpoint and rank by dev DER.
    Finetune {
        #[arg(long, value_name = "CKPT")]
        base: PathBuf,
        #[arg(long, value_name = "DIR")]
        features_dir: PathBuf,
        #[arg(long, value_name = "RTTM")]
        rttm: PathBuf,
        #[arg(long, value_name = "DIR")]
        dev_features_dir: PathBuf,
        #[arg(long, value_name = "RTTM")]
        dev_rttm: PathBuf,
    },
    /// Decode speech posteriors into an RTTM hypothesis.
    Infer {
        #[arg(long, value_name = "CKPT")]
        model: PathBuf,
        #[arg(long, value_name = "DIR")]
        features_dir: PathBuf,
    },
    /// Diarization error rate between reference and hypothesis RTTM files.
    Score {
        #[arg(long, value_name = "RTTM")]
        reference: PathBuf,
        #[arg(long, value_name = "RTTM")]
        hypothesis: PathBuf,
    },
    /// Finite-difference audit of the analytic gradients on toy models.
    Gradcheck,
    /// Per-layer parameter ledger for the configured encoder.
    Paramcount,
    /// Self-contained synthetic pipeline; writes every artifact under --out.
    Smoke,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eend-lab: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn thread_cap(flag: Option<usize>) -> Result<Option<usize>> {
    let jobs = match flag {
        Some(n) => Some(n),
        None => match env::var("EEND_LAB_JOBS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                Error::config(format!("EEND_LAB_JOBS must be a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if jobs == Some(0) {
        return Err(Error::config("--jobs must be >= 1"));
    }
    Ok(jobs)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = thread_cap(cli.jobs)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config(format!("--jobs: {e}")))?;
    }
    let cfg = config::load(cli.config.as_deref(), cli.seed)?;
    let out = cli.out.as_deref();

    match cli.command {
        Command::Featurize { wavs } => featurize(&cfg, require_out(out)?, &wavs),
        Command::Simulate { manifest, count, noise_wav, rir_wav } => {
            simulate(&cfg, require_out(out)?, &manifest, count, &noise_wav, &rir_wav)
        }
        Command::Stats { rttm } => {
            let annotations: Vec<Annotation> = parse_rttm(&rttm)?.into_values().collect();
            print!("{}", corpus_stats(&annotations)?.tsv());
            Ok(())
        }
        Command::Similarity { rttm_a, rttm_b } => {
            let a: Vec<Annotation> = parse_rttm(&rttm_a)?.into_values().collect();
            let b: Vec<Annotation> = parse_rttm(&rttm_b)?.into_values().collect();
            let (overlap, silence) = compare_corpora(&a, &b, DEFAULT_GAMMA)?;
            print!("{}{}", overlap.tsv_line(), silence.tsv_line());
            Ok(())
        }
        Command::Train { features_dir, rttm } => {
            train_cmd(&cfg, require_out(out)?, &features_dir, &rttm)
        }
        Command::Average { checkpoints } => {
            let model = average_checkpoints(&checkpoints)?;
            let path = require_out(out)?.join("averaged.ckpt");
            write_checkpoint(&path, &model)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Finetune { base, features_dir, rttm, dev_features_dir, dev_rttm } => finetune_cmd(
            &cfg,
            require_out(out)?,
            &base,
            &features_dir,
            &rttm,
            &dev_features_dir,
            &dev_rttm,
        ),
        Command::Infer { model, features_dir } => {
            infer(&cfg, require_out(out)?, &model, &features_dir)
        }
        Command::Score { reference, hypothesis } => {
            let refs = parse_rttm(&reference)?;
            let hyps = parse_rttm(&hypothesis)?;
            let (rows, pooled) = score_corpus(&refs, &hyps, cfg.score.collar, false)?;
            print!("recording\tscored\tmiss\tfa\tconf\tder\n");
            for (id, report) in &rows {
                print!("{}", report.tsv_line(id));
            }
            print!("{}", pooled.tsv_line("pooled"));
            Ok(())
        }
        Command::Gradcheck => {
            let rows = gradcheck::run(cfg.train.seed)?;
            let mut worst = 0.0f64;
            for row in &rows {
                worst = worst.max(row.max_rel_err);
                println!(
                    "{}\t{}\t{:e}",
                    gradcheck::arch_name(row.arch),
                    gradcheck::frontend_name(row.frontend),
                    row.max_rel_err
                );
            }
            println!("max\t{worst:e}");
            Ok(())
        }
        Command::Paramcount => {
            print!("{}", parameter_count(&cfg.encoder)?.tsv());
            Ok(())
        }
        Command::Smoke => {
            let seed = cfg.seed.unwrap_or(1);
            let summary = smoke::pipeline_smoke(require_out(out)?, seed)?;
            print!("{}", summary.text);
            Ok(())
        }
    }
}

fn require_out(out: Option<&Path>) -> Result<&Path> {
    let dir = out.ok_or_else(|| Error::config("this subcommand requires --out DIR"))?;
    fs::create_dir_all(dir)?;
    Ok(dir)
}

fn recording_id(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::input(format!("cannot derive a recording id from {}", path.display())))
}

/// All `.feat` archives in a directory, sorted by recording id so every
/// downstream artifact has a stable order.
fn read_features_dir(dir: &Path) -> Result<Vec<(String, FeatureMatrix)>> {
    let mut entries = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "feat") {
            entries.push((recording_id(&path)?, path));
        }
    }
    if entries.is_empty() {
        return Err(Error::input(format!("no .feat archives under {}", dir.display())));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    entries
        .into_iter()
        .map(|(id, path)| Ok((id, read_feature_archive(&path)?)))
        .collect()
}

fn build_corpus(
    cfg: &RunConfig,
    features_dir: &Path,
    rttm: &Path,
) -> Result<(Vec<TrainSequence>, BTreeMap<String, Annotation>)> {
    let references = parse_rttm(rttm)?;
    let mut corpus = Vec::new();
    for (id, feats) in read_features_dir(features_dir)? {
        let ann = references
            .get(&id)
            .ok_or_else(|| Error::input(format!("no reference for recording {id}")))?;
        let labels =
            rasterize_labels(ann, feats.data.rows().div_ceil(10), cfg.encoder.n_speakers)?;
        corpus.push(TrainSequence { id, features: feats.data, labels });
    }
    Ok((corpus, references))
}

fn featurize(cfg: &RunConfig, out: &Path, wavs: &[PathBuf]) -> Result<()> {
    for path in wavs {
        let id = recording_id(path)?;
        let feats = logmel(&load_wav(path)?, cfg.feature.n_mels)?;
        write_feature_archive(out.join(format!("{id}.feat")), &feats)?;
        println!("{id}\t{}\t{}", feats.data.rows(), feats.data.cols());
    }
    Ok(())
}

fn simulate(
    cfg: &RunConfig,
    out: &Path,
    manifest: &Path,
    count: u64,
    noise_wav: &[PathBuf],
    rir_wav: &[PathBuf],
) -> Result<()> {
    let pool = build_pool(manifest, cfg.sim.min_utt_len)?;
    let noise: Vec<Waveform> = noise_wav.iter().map(load_wav).collect::<Result<_>>()?;
    let rirs: Vec<Vec<f64>> =
        rir_wav.iter().map(|p| Ok(load_wav(p)?.samples)).collect::<Result<_>>()?;
    let add_noise = !noise.is_empty() && !cfg.sim.snr_db.is_empty();

    let mut annotations = Vec::new();
    for i in 0..count {
        let id = format!("mix{i:04}");
        let (mut wave, ann) = corpus_mixture(&pool, &cfg.sim, i, &id)?;
        if add_noise || cfg.sim.use_rir {
            // A separate child stream keeps augmentation draws from
            // disturbing the placement stream.
            let mut rng = Rng::new(Rng::child_seed(cfg.sim.seed, (1 << 32) + i));
            let snr = if add_noise {
                cfg.sim.snr_db[rng.uniform_usize(cfg.sim.snr_db.len())]
            } else {
                f64::INFINITY
            };
            wave = augment_mixture(&wave, &noise, &rirs, snr, cfg.sim.use_rir, &mut rng)?;
        }
        write_wav(out.join(format!("{id}.wav")), &wave)?;
        println!("{id}\t{:.3}", ann.duration);
        annotations.push(ann);
    }
    fs::write(out.join("ref.rttm"), emit_rttm(&annotations))?;
    config::echo(cfg, out)
}

fn train_cmd(cfg: &RunConfig, out: &Path, features_dir: &Path, rttm: &Path) -> Result<()> {
    let (corpus, _) = build_corpus(cfg, features_dir, rttm)?;
    let mut model = Model::init(cfg.encoder.clone(), &mut Rng::new(cfg.train.seed))?;
    let log = train(&mut model, &corpus, &cfg.train, Some(out))?;
    fs::write(out.join("loss.log"), log.text())?;
    if let Some(last) = log.lines.last() {
        println!("{}\t{}\t{}", last.step, last.lr, last.loss);
    }
    config::echo(cfg, out)
}

fn finetune_cmd(
    cfg: &RunConfig,
    out: &Path,
    base: &Path,
    features_dir: &Path,
    rttm: &Path,
    dev_features_dir: &Path,
    dev_rttm: &Path,
) -> Result<()> {
    let base = read_checkpoint(base)?;
    let (adapt, _) = build_corpus(cfg, features_dir, rttm)?;
    let dev_refs = parse_rttm(dev_rttm)?;
    let mut dev = Vec::new();
    for (id, feats) in read_features_dir(dev_features_dir)? {
        let reference = dev_refs
            .get(&id)
            .cloned()
            .ok_or_else(|| Error::input(format!("no dev reference for recording {id}")))?;
        dev.push(EvalSequence { id, features: feats.data, reference });
    }
    let outcomes = finetune(
        &base,
        &adapt,
        &dev,
        cfg.train.epochs,
        cfg.train.batch_size,
        cfg.train.seed,
        &cfg.score.eval(),
    )?;
    let report = finetune_report_tsv(&outcomes);
    fs::write(out.join("report.tsv"), &report)?;
    print!("{report}");
    config::echo(cfg, out)
}

fn infer(cfg: &RunConfig, out: &Path, model: &Path, features_dir: &Path) -> Result<()> {
    let model = read_checkpoint(model)?;
    let mut annotations = Vec::new();
    for (id, feats) in read_features_dir(features_dir)? {
        let (post, _) = model.forward(&feats.data)?;
        annotations.push(decide(&post, &id, cfg.score.threshold, cfg.score.median_window)?);
    }
    fs::write(out.join("hyp.rttm"), emit_rttm(&annotations))?;
    Ok(())
}
