use std::path::{Path, PathBuf};

use crate::encoder::{read_checkpoint, Model};
use crate::error::{Error, Result};

/// Elementwise mean of the parameter bundles of models that share one
/// configuration. The mean is computed around the first bundle (base +
/// mean of differences), which makes averaging k identical bundles return
/// them bit for bit and makes the single-input case exact.
pub fn average_models(models: &[Model]) -> Result<Model> {
    let first = models
        .first()
        .ok_or_else(|| Error::input("average: no checkpoints given"))?;
    for (i, m) in models.iter().enumerate().skip(1) {
        if m.config != first.config {
            return Err(Error::input(format!(
                "average: checkpoint {i} was built with a different configuration"
            )));
        }
    }
    let base = first.params.to_flat_vec();
    let mut acc = vec![0.0; base.len()];
    for m in models {
        let flat = m.params.to_flat_vec();
        for (a, (x, b)) in acc.iter_mut().zip(flat.iter().zip(base.iter())) {
            *a += x - b;
        }
    }
    let k = models.len() as f64;
    let mean: Vec<f64> = base.iter().zip(acc.iter()).map(|(b, a)| b + a / k).collect();
    let mut out = first.clone();
    out.params.from_flat_slice(&mean)?;
    Ok(out)
}

pub fn average_checkpoints(paths: &[PathBuf]) -> Result<Model> {
    if paths.is_empty() {
        return Err(Error::input("average: no checkpoints given"));
    }
    let models = paths.iter().map(read_checkpoint).collect::<Result<Vec<_>>>()?;
    average_models(&models)
}

/// Paths of the last `average_last` per-epoch checkpoints written by a
/// training run of `epochs` epochs.
pub fn last_epoch_paths(dir: &Path, epochs: usize, average_last: usize) -> Result<Vec<PathBuf>> {
    if average_last == 0 || average_last > epochs {
        return Err(Error::input(format!(
            "average: cannot take the last {average_last} of {epochs} epochs"
        )));
    }
    Ok((epochs - average_last + 1..=epochs)
        .map(|e| dir.join(format!("epoch{e}.ckpt")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{write_checkpoint, Arch, EncoderConfig, Frontend};
    use crate::numerics::Rng;

    fn toy_model(seed: u64) -> Model {
        let cfg = EncoderConfig::toy(Arch::Transformer, Frontend::Stacked);
        Model::init(cfg, &mut Rng::new(seed)).unwrap()
    }

    #[test]
    fn identical_checkpoints_average_to_themselves() {
        let m = toy_model(3);
        let avg = average_models(&[m.clone(), m.clone(), m.clone()]).unwrap();
        assert_eq!(avg.params.to_flat_vec(), m.params.to_flat_vec());
    }

    #[test]
    fn two_checkpoints_average_to_the_midpoint() {
        let a = toy_model(4);
        let b = toy_model(5);
        let avg = average_models(&[a.clone(), b.clone()]).unwrap();
        let (fa, fb, fm) =
            (a.params.to_flat_vec(), b.params.to_flat_vec(), avg.params.to_flat_vec());
        for i in 0..fa.len() {
            let want = (fa[i] + fb[i]) / 2.0;
            assert!((fm[i] - want).abs() <= 1e-15, "index {i}: {} vs {want}", fm[i]);
        }
    }

    #[test]
    fn ten_checkpoints_match_a_scalar_loop_oracle() {
        let models: Vec<Model> = (0..10).map(|s| toy_model(100 + s)).collect();
        let avg = average_models(&models).unwrap();
        let flats: Vec<Vec<f64>> = models.iter().map(|m| m.params.to_flat_vec()).collect();
        let got = avg.params.to_flat_vec();
        for i in 0..got.len() {
            let mut sum = 0.0;
            for flat in &flats {
                sum += flat[i];
            }
            let want = sum / 10.0;
            assert!(
                (got[i] - want).abs() <= 1e-12 * want.abs().max(1.0),
                "index {i}: {} vs {want}",
                got[i]
            );
        }
    }

    #[test]
    fn averaging_is_idempotent_on_its_own_output() {
        let models: Vec<Model> = (0..3).map(|s| toy_model(200 + s)).collect();
        let once = average_models(&models).unwrap();
        let twice = average_models(&[once.clone()]).unwrap();
        assert_eq!(once.params.to_flat_vec(), twice.params.to_flat_vec());
    }

    #[test]
    fn config_mismatch_is_an_input_error() {
        let a = toy_model(6);
        let cfg = EncoderConfig::toy(Arch::Conformer, Frontend::Stacked);
        let b = Model::init(cfg, &mut Rng::new(7)).unwrap();
        assert!(average_models(&[a, b]).is_err());
    }

    #[test]
    fn empty_list_is_an_input_error() {
        assert!(average_models(&[]).is_err());
        assert!(average_checkpoints(&[]).is_err());
    }

    #[test]
    fn file_round_trip_through_average() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = Vec::new();
        for s in 0..3 {
            let m = toy_model(300 + s);
            let path = dir.path().join(format!("epoch{}.ckpt", s + 1));
            write_checkpoint(&path, &m).unwrap();
            paths.push(path);
        }
        let from_files = average_checkpoints(&paths).unwrap();
        let in_memory =
            average_models(&(0..3).map(|s| toy_model(300 + s)).collect::<Vec<_>>()).unwrap();
        assert_eq!(from_files.params.to_flat_vec(), in_memory.params.to_flat_vec());
    }

    #[test]
    fn last_epoch_paths_name_the_trailing_checkpoints() {
        let dir = Path::new("/tmp/run");
        let paths = last_epoch_paths(dir, 100, 10).unwrap();
        assert_eq!(paths.len(), 10);
        assert_eq!(paths[0], dir.join("epoch91.ckpt"));
        assert_eq!(paths[9], dir.join("epoch100.ckpt"));
        assert!(last_epoch_paths(dir, 5, 10).is_err());
    }
}
