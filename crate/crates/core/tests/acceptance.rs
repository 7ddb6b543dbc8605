//! Acceptance suite: every pinned contract of the pipeline gets one test
//! with an independent oracle and a hard tolerance. Each test prints a
//! single `criterion NN (<name>): pass|fail` line (visible under
//! `--nocapture`; cargo replays the output of failing tests anyway).

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use eend_core::annotation::Annotation;
use eend_core::encoder::{
    block_forward, decide, parameter_count, Arch, EncoderConfig, EncoderParams, Frontend, Model,
    NORM_EPS,
};
use eend_core::features::{logmel, write_wav, Waveform, SAMPLE_RATE};
use eend_core::numerics::{layer_norm, Matrix, Rng};
use eend_core::scoring::{der, min_cost_assignment, score_corpus};
use eend_core::simulator::{add_noise, corpus_mixture, corpus_stats, parse_manifest, SimConfig, UtterancePool};
use eend_core::training::{
    average_models, finetune_grid, mean_corpus_loss, noam_lr, pit_bce_grad, pit_bce_loss,
    rasterize_labels, train, OptimizerKind, Schedule, TrainConfig, TrainSequence,
};
use eend_core::turntaking::{emd_1d, DurationSample, RegionKind};

fn report(label: &str, f: impl FnOnce()) {
    let outcome = catch_unwind(AssertUnwindSafe(f));
    match outcome {
        Ok(()) => println!("criterion {label}: pass"),
        Err(e) => {
            println!("criterion {label}: fail");
            resume_unwind(e);
        }
    }
}

fn flatten(params: &EncoderParams) -> Vec<f64> {
    params.tensors().iter().flat_map(|(_, t)| t.iter().copied()).collect()
}

fn set_flat(params: &mut EncoderParams, flat: usize, v: f64) {
    let mut off = 0;
    for (_, t) in params.tensors_mut() {
        if flat < off + t.len() {
            t[flat - off] = v;
            return;
        }
        off += t.len();
    }
    panic!("flat index {flat} beyond parameter bundle");
}

fn random_binary(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.uniform_usize(2) as f64)
}

#[test]
fn criterion_01_gradient_correctness() {
    report("01 (gradient correctness)", || {
        let started = Instant::now();
        let combos = [
            (Arch::Transformer, Frontend::Stacked),
            (Arch::Transformer, Frontend::ConvSubsample),
            (Arch::Conformer, Frontend::Stacked),
            (Arch::Conformer, Frontend::ConvSubsample),
        ];
        let h = 1e-6;
        let mut worst = 0.0f64;
        for (arch, frontend) in combos {
            for seed in 1..=5u64 {
                let cfg = EncoderConfig::toy(arch, frontend);
                let mut rng = Rng::new(seed);
                let mut model = Model::init(cfg, &mut rng).unwrap();
                let feats = Matrix::from_fn(120, 23, |_, _| rng.uniform_f64(-1.0, 1.0));
                let labels = random_binary(12, 2, &mut rng);

                let (post, cache) = model.forward(&feats).unwrap();
                assert_eq!(post.data.rows(), 12, "posterior rows for 120 input frames");
                let (_, perm) = pit_bce_loss(&post, &labels).unwrap();
                let dz = pit_bce_grad(&post, &labels, &perm).unwrap();
                let analytic = flatten(&model.backward(&cache, &dz).unwrap());

                let theta = flatten(&model.params);
                for k in 0..theta.len() {
                    set_flat(&mut model.params, k, theta[k] + h);
                    let up = pit_bce_loss(&model.forward(&feats).unwrap().0, &labels).unwrap().0;
                    set_flat(&mut model.params, k, theta[k] - h);
                    let down = pit_bce_loss(&model.forward(&feats).unwrap().0, &labels).unwrap().0;
                    set_flat(&mut model.params, k, theta[k]);
                    let numeric = (up - down) / (2.0 * h);
                    let denom = analytic[k].abs().max(numeric.abs()).max(1e-4);
                    worst = worst.max((analytic[k] - numeric).abs() / denom);
                }
                assert!(
                    worst <= 1e-4,
                    "{arch:?}/{frontend:?} seed {seed}: max relative gradient error {worst:e}"
                );
            }
        }
        assert!(worst <= 1e-4, "max relative gradient error {worst:e}");
        assert!(started.elapsed().as_secs() < 120, "gradient sweep exceeded 2 minutes");
    });
}

#[test]
fn criterion_02_parameter_counts() {
    report("02 (parameter counts)", || {
        let checks = [
            (EncoderConfig::transformer_default(), 4.4e6),
            (EncoderConfig::conformer_default(), 4.2e6),
        ];
        for (cfg, target) in checks {
            let count = parameter_count(&cfg).unwrap();
            let gap = (count.total as f64 - target).abs() / target;
            assert!(gap <= 0.15, "{:?}: total {} is {:.1}% from {target}", cfg.arch, count.total, 100.0 * gap);
            let ledger_sum: usize = count.entries.iter().map(|e| e.count).sum();
            assert_eq!(ledger_sum, count.total, "ledger rows must sum to the total");
            assert!(count.entries.iter().all(|e| e.count > 0), "every ledger row explains a term");
            assert!(count.entries.len() >= cfg.n_blocks + 2, "ledger covers frontend, blocks, and head");
        }
    });
}

#[test]
fn criterion_03_zero_parameter_structure() {
    report("03 (zero-parameter structure)", || {
        // A zero-weight conformer block must collapse to its final layer
        // norm: every sub-module contributes zero into the residual stream.
        let cfg = EncoderConfig::toy(Arch::Conformer, Frontend::Stacked);
        let params = EncoderParams::zeros(&cfg).unwrap();
        let mut rng = Rng::new(9);
        let x = Matrix::from_fn(12, cfg.d_model, |_, _| rng.uniform_f64(-2.0, 2.0));
        let (y, _) = block_forward(&params.blocks[0], &x, cfg.n_heads).unwrap();
        let unit_gain = vec![1.0; cfg.d_model];
        let zero_bias = vec![0.0; cfg.d_model];
        let want = layer_norm(&x, &unit_gain, &zero_bias, NORM_EPS).unwrap();
        assert_eq!(y.data(), want.data(), "zero conformer block is not layer_norm(input)");

        // A zero-parameter model ends in a zero logit, so every posterior
        // is exactly sigmoid(0) = 0.5.
        for (arch, frontend) in [
            (Arch::Transformer, Frontend::Stacked),
            (Arch::Transformer, Frontend::ConvSubsample),
            (Arch::Conformer, Frontend::Stacked),
            (Arch::Conformer, Frontend::ConvSubsample),
        ] {
            let model = Model::zeros(EncoderConfig::toy(arch, frontend)).unwrap();
            let feats = Matrix::from_fn(120, 23, |_, _| rng.uniform_f64(-1.0, 1.0));
            let (post, _) = model.forward(&feats).unwrap();
            assert!(
                post.data.data().iter().all(|&p| p == 0.5),
                "{arch:?}/{frontend:?}: zero model posterior is not exactly 0.5"
            );
        }
    });
}

fn sample(kind: RegionKind, durations: Vec<f64>) -> DurationSample {
    DurationSample { kind, durations }
}

/// Exact transport cost by exhaustive assignment: replicate each point mass
/// to the common denominator and let the Hungarian solver search every
/// pairing, with no sorting or quantile shortcut.
fn emd_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    let l = xs.len() / gcd(xs.len(), ys.len()) * ys.len();
    let rep = |v: &[f64]| -> Vec<f64> {
        v.iter().flat_map(|&x| std::iter::repeat(x).take(l / v.len())).collect()
    };
    let (a, b) = (rep(xs), rep(ys));
    let cost = Matrix::from_fn(l, l, |i, j| (a[i] - b[j]).abs());
    let assignment = min_cost_assignment(&cost).unwrap();
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).abs()).sum();
    total / l as f64
}

#[test]
fn criterion_04_emd_oracle_equivalence() {
    report("04 (emd oracle equivalence)", || {
        let started = Instant::now();
        let mut rng = Rng::new(41);
        let draw = |rng: &mut Rng| -> Vec<f64> {
            let n = 1 + rng.uniform_usize(8);
            (0..n).map(|_| rng.uniform_f64(0.0, 5.0)).collect()
        };
        for case in 0..200 {
            let xs = draw(&mut rng);
            let ys = draw(&mut rng);
            let got = emd_1d(
                &sample(RegionKind::Overlap, xs.clone()),
                &sample(RegionKind::Overlap, ys.clone()),
            )
            .unwrap();
            let want = emd_oracle(&xs, &ys);
            assert!((got - want).abs() <= 1e-9, "case {case}: emd {got} vs oracle {want}");
        }
        for case in 0..100 {
            let a = sample(RegionKind::Silence, draw(&mut rng));
            let b = sample(RegionKind::Silence, draw(&mut rng));
            let c = sample(RegionKind::Silence, draw(&mut rng));
            let (ab, ba) = (emd_1d(&a, &b).unwrap(), emd_1d(&b, &a).unwrap());
            let (bc, ac) = (emd_1d(&b, &c).unwrap(), emd_1d(&a, &c).unwrap());
            assert!(ab >= 0.0, "case {case}: negative distance");
            assert!(emd_1d(&a, &a).unwrap() <= 1e-9, "case {case}: d(a,a) not ~0");
            assert!((ab - ba).abs() <= 1e-9, "case {case}: asymmetric distance");
            assert!(ac <= ab + bc + 1e-9, "case {case}: triangle inequality broken");
        }
        assert!(started.elapsed().as_secs() < 30, "emd oracle sweep exceeded 30 s");
    });
}

/// Every injective partial map from hypothesis speakers to reference
/// speakers, so the confusion minimum is searched by brute force.
fn all_matchings(n_ref: usize, n_hyp: usize) -> Vec<Vec<Option<usize>>> {
    fn rec(
        h: usize,
        n_hyp: usize,
        n_ref: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        out: &mut Vec<Vec<Option<usize>>>,
    ) {
        if h == n_hyp {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        rec(h + 1, n_hyp, n_ref, used, cur, out);
        cur.pop();
        for r in 0..n_ref {
            if !used[r] {
                used[r] = true;
                cur.push(Some(r));
                rec(h + 1, n_hyp, n_ref, used, cur, out);
                cur.pop();
                used[r] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, n_hyp, n_ref, &mut vec![false; n_ref], &mut Vec::new(), &mut out);
    out
}

/// Brute-force scorer on a 1 ms midpoint grid: per-cell activity straight
/// from the segment lists, confusion minimized over every speaker matching.
fn der_grid_oracle(reference: &Annotation, hypothesis: &Annotation, collar: f64) -> f64 {
    let end = reference.duration.max(hypothesis.duration).max(collar + 0.001);
    let n_cells = (end / 0.001).ceil() as usize;
    let ref_speakers = reference.speakers();
    let hyp_speakers = hypothesis.speakers();
    let active = |a: &Annotation, name: &str, t: f64| {
        a.segments.iter().any(|s| s.speaker == name && s.start <= t && t < s.end)
    };

    // Per-cell activity masks, computed once.
    let mut cells: Vec<(u32, u32)> = Vec::with_capacity(n_cells);
    for i in 0..n_cells {
        let t = (i as f64 + 0.5) * 0.001;
        let in_collar = reference.segments.iter().any(|s| {
            (t >= s.start - collar && t <= s.start + collar)
                || (t >= s.end - collar && t <= s.end + collar)
        });
        if in_collar {
            continue;
        }
        let mut rm = 0u32;
        for (k, name) in ref_speakers.iter().enumerate() {
            if active(reference, name, t) {
                rm |= 1 << k;
            }
        }
        let mut hm = 0u32;
        for (k, name) in hyp_speakers.iter().enumerate() {
            if active(hypothesis, name, t) {
                hm |= 1 << k;
            }
        }
        cells.push((rm, hm));
    }

    let mut best = f64::INFINITY;
    for matching in all_matchings(ref_speakers.len(), hyp_speakers.len()) {
        let (mut scored, mut miss, mut fa, mut conf) = (0u64, 0u64, 0u64, 0u64);
        for &(rm, hm) in &cells {
            let nr = u64::from(rm.count_ones());
            let nh = u64::from(hm.count_ones());
            let correct = matching
                .iter()
                .enumerate()
                .filter(|&(h, r)| hm & (1 << h) != 0 && r.is_some_and(|r| rm & (1 << r) != 0))
                .count() as u64;
            scored += nr;
            miss += nr.saturating_sub(nh);
            fa += nh.saturating_sub(nr);
            conf += nr.min(nh) - correct.min(nr.min(nh));
        }
        let total = (miss + fa + conf) as f64;
        let this = if scored > 0 {
            100.0 * total / scored as f64
        } else if total > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        best = best.min(this);
    }
    best
}

#[test]
fn criterion_05_der_oracle_equivalence() {
    report("05 (der oracle equivalence)", || {
        let collar = 0.25;
        let mut rng = Rng::new(53);
        for case in 0..100 {
            // Everything lands on the 10 ms grid so scorer and oracle see
            // the same cell boundaries.
            let dur_cs = 800 + rng.uniform_usize(700);
            let dur = dur_cs as f64 / 100.0;
            let id = format!("case{case}");
            let mut reference = Annotation::new(&id, dur);
            for spk in ["a", "b"] {
                for _ in 0..1 + rng.uniform_usize(3) {
                    let len = 80 + rng.uniform_usize(200);
                    let start = rng.uniform_usize(dur_cs - len);
                    reference.push(spk, start as f64 / 100.0, (start + len) as f64 / 100.0);
                }
            }
            let mut hypothesis = Annotation::new(&id, dur);
            for spk in ["x", "y"] {
                for _ in 0..rng.uniform_usize(3) {
                    let len = 60 + rng.uniform_usize(240);
                    let start = rng.uniform_usize(dur_cs - len);
                    hypothesis.push(spk, start as f64 / 100.0, (start + len) as f64 / 100.0);
                }
            }
            let got = der(&reference, &hypothesis, collar).unwrap().der;
            let want = der_grid_oracle(&reference, &hypothesis, collar);
            if want.is_finite() {
                assert!(
                    (got - want).abs() <= 0.01,
                    "case {case}: der {got} vs grid oracle {want}"
                );
            } else {
                assert!(!got.is_finite(), "case {case}: oracle diverged, scorer did not");
            }

            let self_score = der(&reference, &reference, collar).unwrap();
            assert_eq!(self_score.missed, 0.0, "case {case}: self-score missed");
            assert_eq!(self_score.false_alarm, 0.0, "case {case}: self-score false alarm");
            assert_eq!(self_score.confusion, 0.0, "case {case}: self-score confusion");
            assert_eq!(self_score.der, 0.0, "case {case}: der(x,x) != 0");
        }

        // Hand-checked collar case: one 10 s segment, empty hypothesis,
        // 0.25 s collar eats 0.25 s at each edge.
        let mut reference = Annotation::new("hand", 10.0);
        reference.push("a", 0.0, 10.0);
        let hypothesis = Annotation::new("hand", 10.0);
        let report = der(&reference, &hypothesis, collar).unwrap();
        assert_eq!(report.scored_speech, 9.5);
        assert_eq!(report.missed, 9.5);
        assert_eq!(report.der, 100.0);
    });
}

#[test]
fn criterion_06_pit_properties() {
    report("06 (pit properties)", || {
        use itertools::Itertools;
        let mut rng = Rng::new(67);

        // Permuting label columns relabels the permutation that wins; the
        // winning sum is the identical float sequence, so equality is exact.
        for _ in 0..20 {
            let post = eend_core::encoder::PosteriorMatrix {
                data: Matrix::from_fn(10, 3, |_, _| rng.uniform_f64(0.02, 0.98)),
                frame_shift: 0.1,
            };
            let labels = random_binary(10, 3, &mut rng);
            let (base, _) = pit_bce_loss(&post, &labels).unwrap();
            for shuffle in (0..3).permutations(3) {
                let shuffled = Matrix::from_fn(10, 3, |r, c| labels.get(r, shuffle[c]));
                let (loss, _) = pit_bce_loss(&post, &shuffled).unwrap();
                assert_eq!(loss, base, "label shuffle {shuffle:?} changed the loss");
            }
        }

        // Two-speaker exhaustive oracle: only two pairings exist.
        for case in 0..50 {
            let post = eend_core::encoder::PosteriorMatrix {
                data: Matrix::from_fn(8, 2, |_, _| rng.uniform_f64(0.02, 0.98)),
                frame_shift: 0.1,
            };
            let labels = random_binary(8, 2, &mut rng);
            let bce = |perm: [usize; 2]| -> f64 {
                let mut total = 0.0;
                for r in 0..8 {
                    for c in 0..2 {
                        let p = post.data.get(r, c);
                        let y = labels.get(r, perm[c]);
                        total -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
                    }
                }
                total / 16.0
            };
            let want = bce([0, 1]).min(bce([1, 0]));
            let (got, _) = pit_bce_loss(&post, &labels).unwrap();
            assert!((got - want).abs() <= 1e-12, "case {case}: pit {got} vs oracle {want}");
        }
    });
}

fn tone(freq: f64, secs: f64, amp: f64) -> Waveform {
    let n = (secs * SAMPLE_RATE as f64).round() as usize;
    Waveform::new(
        (0..n).map(|i| amp * (TAU * freq * i as f64 / SAMPLE_RATE as f64).sin()).collect(),
    )
}

/// Two synthetic speakers with disjoint spectra, written as wav files so the
/// pool walks the same manifest path as real data.
fn tone_pool(dir: &std::path::Path) -> UtterancePool {
    let spec = [
        ("s1", 440.0, 0.40, [1.4, 1.7, 1.2]),
        ("s2", 1700.0, 0.35, [1.5, 1.3, 1.8]),
    ];
    let mut manifest = String::new();
    for (name, freq, amp, lens) in spec {
        for (k, secs) in lens.into_iter().enumerate() {
            let path = dir.join(format!("{name}_{k}.wav"));
            write_wav(&path, &tone(freq, secs, amp)).unwrap();
            manifest.push_str(&format!("{name}\t{}\t{secs}\n", path.display()));
        }
    }
    parse_manifest(&manifest, 0.0).unwrap()
}

#[test]
fn criterion_07_overfit_probe() {
    report("07 (overfit probe)", || {
        let started = Instant::now();
        let dir = tempfile::tempdir().unwrap();
        let pool = tone_pool(dir.path());
        let sim = SimConfig {
            n_utts_min: 2,
            n_utts_max: 3,
            gap_mean_beta: 1.2,
            snr_db: Vec::new(),
            seed: 11,
            ..SimConfig::default()
        };

        let mut corpus = Vec::new();
        let mut references = BTreeMap::new();
        for i in 0..2u64 {
            let id = format!("mix{i}");
            let (wave, ann) = corpus_mixture(&pool, &sim, i, &id).unwrap();
            let feats = logmel(&wave, 23).unwrap().data;
            let labels = rasterize_labels(&ann, feats.rows().div_ceil(10), 2).unwrap();
            corpus.push(TrainSequence { id: id.clone(), features: feats, labels });
            references.insert(id, ann);
        }

        for (arch, frontend) in [(Arch::Conformer, Frontend::ConvSubsample), (Arch::Transformer, Frontend::Stacked)] {
            let cfg = EncoderConfig::toy(arch, frontend);
            let mut rng = Rng::new(5);
            let mut model = Model::init(cfg, &mut rng).unwrap();
            let before = mean_corpus_loss(&model, &corpus).unwrap();

            let tc = TrainConfig {
                optimizer: OptimizerKind::Adam,
                schedule: Schedule::Fixed,
                lr: 3e-3,
                epochs: 500,
                batch_size: 64,
                average_last: 1,
                seed: 3,
                ..TrainConfig::default()
            };
            let log = train(&mut model, &corpus, &tc, None).unwrap();
            assert_eq!(log.lines.len(), 500, "one optimizer step per epoch");

            let after = mean_corpus_loss(&model, &corpus).unwrap();
            assert!(
                after <= 0.1 * before,
                "{arch:?}/{frontend:?}: loss only fell {before} -> {after}"
            );

            let mut hypotheses = BTreeMap::new();
            for seq in &corpus {
                let (post, _) = model.forward(&seq.features).unwrap();
                hypotheses.insert(seq.id.clone(), decide(&post, &seq.id, 0.5, 11).unwrap());
            }
            let (_, pooled) = score_corpus(&references, &hypotheses, 0.25, false).unwrap();
            assert!(
                pooled.der < 5.0,
                "{arch:?}/{frontend:?}: training-set der {:.2}%",
                pooled.der
            );
        }
        assert!(started.elapsed().as_secs() < 600, "overfit probe exceeded 10 minutes");
    });
}

#[test]
fn criterion_08_schedule_and_averaging() {
    report("08 (schedule and averaging)", || {
        let pins = [
            (1usize, 1.5811388300841896e-8),
            (25000, 3.952847075210474e-4),
            (100000, 1.976423537605237e-4),
        ];
        for (step, want) in pins {
            let got = noam_lr(step, 256, 25000, 1.0).unwrap();
            assert!((got - want).abs() / want <= 1e-12, "step {step}: {got} vs {want}");
        }

        let cfg = EncoderConfig::toy(Arch::Transformer, Frontend::Stacked);
        let models: Vec<Model> = (0..5)
            .map(|s| Model::init(cfg.clone(), &mut Rng::new(40 + s)).unwrap())
            .collect();
        let averaged = flatten(&average_models(&models).unwrap().params);
        let flats: Vec<Vec<f64>> = models.iter().map(|m| flatten(&m.params)).collect();
        for k in 0..averaged.len() {
            let mean = flats.iter().map(|f| f[k]).sum::<f64>() / flats.len() as f64;
            assert!(
                (averaged[k] - mean).abs() <= 1e-12,
                "coordinate {k}: averaged {} vs mean {mean}",
                averaged[k]
            );
        }

        let grid = finetune_grid();
        assert_eq!(grid.len(), 13, "search grid size");
        let distinct: BTreeSet<String> = grid
            .iter()
            .map(|g| format!("{:?}|{}|{}|{}", g.optimizer, g.lr, g.momentum, g.weight_decay))
            .collect();
        assert_eq!(distinct.len(), 13, "duplicate grid points");
        assert_eq!(grid[0].optimizer, OptimizerKind::Adam, "fixed-rate adam heads the grid");
    });
}

#[test]
fn criterion_09_simulator_statistics() {
    report("09 (simulator statistics)", || {
        let dir = tempfile::tempdir().unwrap();
        let pool = tone_pool(dir.path());

        // Longer silence gaps must push the pooled overlap ratio down.
        let mut ratios = Vec::new();
        for (i, beta) in [0.5, 2.0, 6.0].into_iter().enumerate() {
            let sim = SimConfig {
                n_utts_min: 2,
                n_utts_max: 4,
                gap_mean_beta: beta,
                snr_db: Vec::new(),
                seed: 100 + i as u64,
                ..SimConfig::default()
            };
            let annotations: Vec<Annotation> = (0..200)
                .map(|k| corpus_mixture(&pool, &sim, k, &format!("b{i}m{k}")).unwrap().1)
                .collect();
            ratios.push(corpus_stats(&annotations).unwrap().overlap_ratio_pct);
        }
        assert!(
            ratios[0] > ratios[1] && ratios[1] > ratios[2],
            "overlap ratio not monotone in the gap mean: {ratios:?}"
        );

        // Measured SNR: recover the injected noise by subtraction and
        // compare powers over the nonzero-signal region.
        let mut signal = tone(700.0, 6.0, 0.4);
        signal.samples.extend(std::iter::repeat(0.0).take(2 * SAMPLE_RATE as usize));
        let mut rng = Rng::new(77);
        let bed = Waveform::new((0..3 * SAMPLE_RATE as usize).map(|_| rng.uniform_f64(-0.3, 0.3)).collect());
        let target_db = 12.0;
        let noisy = add_noise(&signal, &bed, target_db).unwrap();
        let (mut ps, mut pn, mut n) = (0.0, 0.0, 0u64);
        for (s, y) in signal.samples.iter().zip(&noisy.samples) {
            if *s != 0.0 {
                ps += s * s;
                pn += (y - s) * (y - s);
                n += 1;
            }
        }
        let achieved = 10.0 * (ps / n as f64 / (pn / n as f64)).log10();
        assert!(
            (achieved - target_db).abs() <= 0.1,
            "snr {achieved:.3} dB vs target {target_db} dB"
        );

        // Pooled corpus statistics against a sample-grid counting oracle.
        let sim = SimConfig {
            n_utts_min: 2,
            n_utts_max: 4,
            gap_mean_beta: 1.0,
            snr_db: Vec::new(),
            seed: 210,
            ..SimConfig::default()
        };
        let annotations: Vec<Annotation> = (0..30)
            .map(|k| corpus_mixture(&pool, &sim, k, &format!("s{k}")).unwrap().1)
            .collect();
        let stats = corpus_stats(&annotations).unwrap();

        let sr = SAMPLE_RATE as f64;
        let (mut overlap, mut exclusive, mut total_secs) = (0u64, 0u64, 0.0);
        for a in &annotations {
            total_secs += a.duration;
            let n = (a.duration * sr).round() as usize;
            let mut counts = vec![0u32; n];
            for seg in &a.segments {
                let s = (seg.start * sr).round() as usize;
                let e = (seg.end * sr).round() as usize;
                for c in &mut counts[s..e] {
                    *c += 1;
                }
            }
            overlap += counts.iter().filter(|&&c| c >= 2).count() as u64;
            exclusive += counts.iter().filter(|&&c| c == 1).count() as u64;
        }
        let want_pct = 100.0 * overlap as f64 / (overlap + exclusive) as f64;
        assert!((stats.overlap_ratio_pct - want_pct).abs() <= 1e-6, "overlap ratio vs sample grid");
        assert!((stats.avg_duration_s - total_secs / 30.0).abs() <= 1e-6, "average duration");
        assert!((stats.total_duration_h - total_secs / 3600.0).abs() <= 1e-6, "total hours");
        assert_eq!(stats.mixtures, 30);
    });
}
