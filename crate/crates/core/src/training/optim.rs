use crate::encoder::EncoderParams;
use crate::error::{Error, Result};
use crate::training::config::{OptimizerKind, TrainConfig};

/// First-order optimizer with its moment/velocity state laid out flat in the
/// same named-tensor order the parameter bundle uses, so the state survives
/// exactly as long as the parameter shapes do.
pub struct Optimizer {
    kind: OptimizerKind,
    beta1: f64,
    beta2: f64,
    eps: f64,
    momentum: f64,
    weight_decay: f64,
    step: usize,
    /// Adam first moment, or the SGD velocity.
    m: Vec<f64>,
    /// Adam second moment; unused for SGD.
    v: Vec<f64>,
    /// (tensor name, element count) for mapping flat offsets to names in
    /// error reports.
    layout: Vec<(String, usize)>,
}

impl Optimizer {
    pub fn new(cfg: &TrainConfig, params: &EncoderParams) -> Self {
        let layout: Vec<(String, usize)> =
            params.tensors().into_iter().map(|(name, data)| (name, data.len())).collect();
        let n = layout.iter().map(|(_, len)| len).sum();
        Optimizer {
            kind: cfg.optimizer,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.eps,
            momentum: cfg.momentum,
            weight_decay: cfg.weight_decay,
            step: 0,
            m: vec![0.0; n],
            v: match cfg.optimizer {
                OptimizerKind::Adam => vec![0.0; n],
                OptimizerKind::Sgd => Vec::new(),
            },
            layout,
        }
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    fn name_at(&self, flat: usize) -> String {
        let mut offset = 0;
        for (name, len) in &self.layout {
            if flat < offset + len {
                return format!("{name}[{}]", flat - offset);
            }
            offset += len;
        }
        format!("<flat index {flat}>")
    }

    /// Applies one update in place. `lr` is supplied per step so a schedule
    /// can drive it.
    pub fn step(&mut self, params: &mut EncoderParams, grads: &EncoderParams, lr: f64) -> Result<()> {
        let mut theta = params.to_flat_vec();
        let g = grads.to_flat_vec();
        if theta.len() != g.len() {
            return Err(Error::train(format!(
                "optimizer: {} parameters but {} gradient entries",
                theta.len(),
                g.len()
            )));
        }
        if let Some(bad) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::train(format!(
                "optimizer: non-finite gradient {} at {}",
                g[bad],
                self.name_at(bad)
            )));
        }
        self.step += 1;
        match self.kind {
            OptimizerKind::Adam => {
                let bc1 = 1.0 - self.beta1.powi(self.step as i32);
                let bc2 = 1.0 - self.beta2.powi(self.step as i32);
                for i in 0..theta.len() {
                    let grad = g[i] + self.weight_decay * theta[i];
                    self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad;
                    self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad * grad;
                    let m_hat = self.m[i] / bc1;
                    let v_hat = self.v[i] / bc2;
                    theta[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
                }
            }
            OptimizerKind::Sgd => {
                for i in 0..theta.len() {
                    self.m[i] = self.momentum * self.m[i] + g[i] + self.weight_decay * theta[i];
                    theta[i] -= lr * self.m[i];
                }
            }
        }
        params.from_flat_slice(&theta)
    }
}
