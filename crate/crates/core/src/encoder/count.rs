//! Closed-form parameter accounting, computed from the configuration alone
//! and cross-checked in tests against actually materialized parameters.

use crate::encoder::config::{Arch, EncoderConfig, Frontend};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CountEntry {
    pub name: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterCount {
    pub entries: Vec<CountEntry>,
    pub total: usize,
}

impl ParameterCount {
    /// One `name\tcount` line per entry plus a trailing total line.
    pub fn tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\n", e.name, e.count));
        }
        out.push_str(&format!("total\t{}\n", self.total));
        out
    }
}

fn linear(i: usize, o: usize) -> usize {
    i * o + o
}

fn norm(d: usize) -> usize {
    2 * d
}

fn attention(d: usize) -> usize {
    4 * linear(d, d)
}

fn ffn_module(d: usize, hidden: usize) -> usize {
    norm(d) + linear(d, hidden) + linear(hidden, d)
}

fn conv_module(d: usize, kernel: usize) -> usize {
    norm(d) + linear(d, 2 * d) + d * kernel + d + norm(d) + linear(d, d)
}

fn block(cfg: &EncoderConfig) -> usize {
    let d = cfg.d_model;
    match cfg.arch {
        Arch::Transformer => {
            2 * norm(d) + attention(d) + linear(d, cfg.ffn_dim) + linear(cfg.ffn_dim, d)
        }
        Arch::Conformer => {
            2 * ffn_module(d, cfg.ffn_dim)
                + norm(d)
                + attention(d)
                + conv_module(d, cfg.conv_kernel)
                + norm(d)
        }
    }
}

pub fn parameter_count(cfg: &EncoderConfig) -> Result<ParameterCount> {
    cfg.validate()?;
    let d = cfg.d_model;
    let mut entries: Vec<CountEntry> = Vec::new();
    let mut push = |name: String, count: usize| entries.push(CountEntry { name, count });
    match cfg.frontend {
        Frontend::Stacked => {
            push("frontend.linear".into(), linear(15 * cfg.input_dims, d));
        }
        Frontend::ConvSubsample => {
            let (c1, c2) = cfg.frontend_channels;
            let f_out = cfg.frontend_out_freq()?;
            push("frontend.conv1".into(), 9 + c1 + c1);
            push("frontend.conv2".into(), c1 * 49 + c1 * c2 + c2);
            push("frontend.linear".into(), linear(f_out * c2, d));
        }
    }
    let per_block = block(cfg);
    for i in 0..cfg.n_blocks {
        push(format!("block{i}"), per_block);
    }
    push("final_ln".into(), norm(d));
    push("head".into(), linear(d, cfg.n_speakers));
    let total = entries.iter().map(|e| e.count).sum();
    Ok(ParameterCount { entries, total })
}
