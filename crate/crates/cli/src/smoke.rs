//! Self-contained pipeline exercise: simulate -> featurize -> train ->
//! average -> infer -> score -> similarity, writing every artifact under one
//! output directory.
//!
//! The utterance pool is generated in-process (tones for one speaker,
//! smoothed noise for the other), so the run needs no external data. No
//! artifact embeds the output path or a timestamp, which makes two runs with
//! the same seed byte-identical, tree for tree.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use eend_core::annotation::Annotation;
use eend_core::encoder::{decide, write_checkpoint, Arch, EncoderConfig, Frontend, Model};
use eend_core::error::{Error, Result};
use eend_core::features::{logmel, write_feature_archive, write_wav, Waveform, SAMPLE_RATE};
use eend_core::numerics::Rng;
use eend_core::scoring::{emit_rttm, score_corpus};
use eend_core::simulator::{corpus_mixture, parse_manifest, SimConfig, UtterancePool};
use eend_core::training::{
    average_checkpoints, last_epoch_paths, rasterize_labels, train, OptimizerKind, Schedule,
    TrainConfig, TrainSequence,
};
use eend_core::turntaking::{compare_corpora, DEFAULT_GAMMA};

use crate::config::RunConfig;

/// Settings the smoke run pins regardless of any configuration file; only
/// the seed comes from outside.
fn smoke_config(seed: u64) -> RunConfig {
    RunConfig {
        seed: Some(seed),
        encoder: EncoderConfig::toy(Arch::Transformer, Frontend::Stacked),
        train: TrainConfig {
            optimizer: OptimizerKind::Adam,
            schedule: Schedule::Fixed,
            lr: 3e-3,
            epochs: 500,
            batch_size: 64,
            average_last: 10,
            seed,
            ..TrainConfig::default()
        },
        sim: SimConfig {
            n_utts_min: 2,
            n_utts_max: 3,
            gap_mean_beta: 1.2,
            snr_db: Vec::new(),
            seed,
            ..SimConfig::default()
        },
        ..RunConfig::default()
    }
}

fn stage_err(name: &str, e: Error) -> Error {
    let wrap = |m: String| format!("smoke stage {name}: {m}");
    match e {
        Error::Config(m) => Error::Config(wrap(m)),
        Error::Input(m) => Error::Input(wrap(m)),
        Error::Format(m) => Error::Format(wrap(m)),
        Error::Train(m) => Error::Train(wrap(m)),
        Error::Eval(m) => Error::Eval(wrap(m)),
        Error::Internal(m) => Error::Internal(wrap(m)),
        other => Error::Internal(wrap(other.to_string())),
    }
}

fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| stage_err(name, e))
}

fn tone_utterance(freq: f64, secs: f64, amp: f64) -> Waveform {
    let sr = SAMPLE_RATE as f64;
    let n = (secs * sr).round() as usize;
    Waveform::new(
        (0..n)
            .map(|i| {
                let t = i as f64 / sr;
                let two_pi = std::f64::consts::TAU;
                amp * ((two_pi * freq * t).sin() + 0.4 * (two_pi * 2.0 * freq * t).sin()) / 1.4
            })
            .collect(),
    )
}

fn noise_utterance(secs: f64, amp: f64, rng: &mut Rng) -> Waveform {
    let n = (secs * SAMPLE_RATE as f64).round() as usize;
    let mut samples = Vec::with_capacity(n);
    let mut state = 0.0;
    for _ in 0..n {
        state = 0.9 * state + rng.uniform_f64(-1.0, 1.0);
        samples.push(state);
    }
    let peak = samples.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-12);
    for v in &mut samples {
        *v *= amp / peak;
    }
    Waveform::new(samples)
}

/// Writes the bundled ~30 s pool (wavs plus manifest) and returns it with
/// entry paths resolved against the pool directory. The manifest itself
/// keeps bare file names so its bytes never depend on the output location.
fn write_pool(dir: &Path) -> Result<UtterancePool> {
    fs::create_dir_all(dir)?;
    let mut rng = Rng::new(0x706f6f6c); // fixed: the pool is bundled content
    let tone_lens = [2.6, 3.1, 2.2, 3.4, 2.8];
    let noise_lens = [2.9, 2.4, 3.3, 2.1, 3.0];

    let mut manifest = String::new();
    for (k, secs) in tone_lens.into_iter().enumerate() {
        let name = format!("s1_{k}.wav");
        write_wav(dir.join(&name), &tone_utterance(440.0, secs, 0.4))?;
        manifest.push_str(&format!("s1\t{name}\t{secs}\n"));
    }
    for (k, secs) in noise_lens.into_iter().enumerate() {
        let name = format!("s2_{k}.wav");
        write_wav(dir.join(&name), &noise_utterance(secs, 0.35, &mut rng))?;
        manifest.push_str(&format!("s2\t{name}\t{secs}\n"));
    }
    fs::write(dir.join("manifest.tsv"), &manifest)?;

    let mut pool = parse_manifest(&manifest, 0.0)?;
    for (_, entries) in &mut pool.speakers {
        for entry in entries {
            entry.wav = dir.join(&entry.wav);
        }
    }
    Ok(pool)
}

pub struct SmokeSummary {
    /// One `der` line followed by the overlap and silence similarity lines.
    pub text: String,
}

pub fn pipeline_smoke(out: &Path, seed: u64) -> Result<SmokeSummary> {
    fs::create_dir_all(out)?;
    let cfg = smoke_config(seed);
    crate::config::echo(&cfg, out)?;

    let pool = stage("pool", || write_pool(&out.join("pool")))?;

    let (mixtures, references) = stage("simulate", || {
        let dir = out.join("mixtures");
        fs::create_dir_all(&dir)?;
        let mut mixtures = Vec::new();
        let mut references = BTreeMap::new();
        for i in 0..2u64 {
            let id = format!("mix{i}");
            let (wave, ann) = corpus_mixture(&pool, &cfg.sim, i, &id)?;
            write_wav(dir.join(format!("{id}.wav")), &wave)?;
            mixtures.push((id.clone(), wave));
            references.insert(id, ann);
        }
        let annotations: Vec<Annotation> = references.values().cloned().collect();
        fs::write(out.join("ref.rttm"), emit_rttm(&annotations))?;
        Ok((mixtures, references))
    })?;

    let corpus = stage("featurize", || {
        let dir = out.join("features");
        fs::create_dir_all(&dir)?;
        let mut corpus = Vec::new();
        for (id, wave) in &mixtures {
            let feats = logmel(wave, cfg.feature.n_mels)?;
            write_feature_archive(dir.join(format!("{id}.feat")), &feats)?;
            let labels = rasterize_labels(
                &references[id],
                feats.data.rows().div_ceil(10),
                cfg.encoder.n_speakers,
            )?;
            corpus.push(TrainSequence { id: id.clone(), features: feats.data, labels });
        }
        Ok(corpus)
    })?;

    let ckpt_dir = out.join("ckpt");
    stage("train", || {
        fs::create_dir_all(&ckpt_dir)?;
        let mut model = Model::init(cfg.encoder.clone(), &mut Rng::new(cfg.train.seed))?;
        let log = train(&mut model, &corpus, &cfg.train, Some(&ckpt_dir))?;
        fs::write(out.join("loss.log"), log.text())?;
        Ok(())
    })?;

    let model = stage("average", || {
        let paths = last_epoch_paths(&ckpt_dir, cfg.train.epochs, cfg.train.average_last)?;
        let model = average_checkpoints(&paths)?;
        write_checkpoint(out.join("averaged.ckpt"), &model)?;
        Ok(model)
    })?;

    let hypotheses = stage("infer", || {
        let mut hypotheses = BTreeMap::new();
        for seq in &corpus {
            let (post, _) = model.forward(&seq.features)?;
            let ann = decide(&post, &seq.id, cfg.score.threshold, cfg.score.median_window)?;
            hypotheses.insert(seq.id.clone(), ann);
        }
        let annotations: Vec<Annotation> = hypotheses.values().cloned().collect();
        fs::write(out.join("hyp.rttm"), emit_rttm(&annotations))?;
        Ok(hypotheses)
    })?;

    let pooled = stage("score", || {
        let (_, pooled) = score_corpus(&references, &hypotheses, cfg.score.collar, false)?;
        Ok(pooled)
    })?;

    let (overlap, silence) = stage("similarity", || {
        let refs: Vec<Annotation> = references.values().cloned().collect();
        let hyps: Vec<Annotation> = hypotheses.values().cloned().collect();
        compare_corpora(&refs, &hyps, DEFAULT_GAMMA)
    })?;

    let text = format!("der\t{:.3}\n{}{}", pooled.der, overlap.tsv_line(), silence.tsv_line());
    fs::write(out.join("summary.tsv"), &text)?;
    Ok(SmokeSummary { text })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_pool_is_two_speakers_of_half_a_minute() {
        let dir = tempfile::tempdir().unwrap();
        let pool = write_pool(dir.path()).unwrap();
        assert_eq!(pool.n_speakers(), 2);
        assert_eq!(pool.n_utterances(), 10);
        let total: f64 = pool
            .speakers
            .iter()
            .flat_map(|(_, utts)| utts.iter().map(|u| u.duration))
            .sum();
        assert!((25.0..32.0).contains(&total), "pool holds {total} s");
    }

    #[test]
    fn pool_manifest_has_no_absolute_paths() {
        let dir = tempfile::tempdir().unwrap();
        write_pool(dir.path()).unwrap();
        let manifest = fs::read_to_string(dir.path().join("manifest.tsv")).unwrap();
        for line in manifest.lines() {
            let wav = line.split('\t').nth(1).unwrap();
            assert!(!wav.contains('/'), "manifest leaks a path: {wav}");
        }
    }

    #[test]
    fn stage_prefix_survives_every_error_variant() {
        let wrapped = stage_err("simulate", Error::input("no speakers"));
        assert_eq!(wrapped.to_string(), "input error: smoke stage simulate: no speakers");
        let wrapped = stage_err("train", Error::parse(3, "bad line"));
        assert!(wrapped.to_string().contains("smoke stage train"));
    }
}
