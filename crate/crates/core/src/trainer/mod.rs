//! Prompt tuning of an [`L3Head`] under the six optimization schedules.

mod loss;

pub use loss::{bce, bce_mean, interaction_indicator, loss_bce, loss_pn, pn_value, BCE_EPS};

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{add_grads, AdamConfig, AdamState, Dropout, ParamSet, Tape, Tensor};
use crate::error::{Error, Result};
use crate::graph::NodeFeatures;
use crate::metrics::micro_f1;
use crate::prompt::{logistic_noise, Gates, L3Head};
use crate::rng;
use crate::split::LabeledPair;

/// Which parameter sets are optimized, and in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Prompt embeddings only, every path kept.
    #[serde(rename = "P")]
    PromptOnly,
    /// Gating network only.
    #[serde(rename = "G")]
    GatingOnly,
    /// Both from the start.
    #[serde(rename = "P&G")]
    Joint,
    /// Prompts with every path kept until convergence, then both.
    #[serde(rename = "P->G")]
    PromptThenGating,
    /// Gating until convergence, then both.
    #[serde(rename = "G->P")]
    GatingThenPrompt,
    /// Alternating epochs of prompts and gating.
    #[serde(rename = "IterPG")]
    Iterative,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::PromptOnly,
        Strategy::GatingOnly,
        Strategy::Joint,
        Strategy::PromptThenGating,
        Strategy::GatingThenPrompt,
        Strategy::Iterative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::PromptOnly => "P",
            Strategy::GatingOnly => "G",
            Strategy::Joint => "P&G",
            Strategy::PromptThenGating => "P->G",
            Strategy::GatingThenPrompt => "G->P",
            Strategy::Iterative => "IterPG",
        }
    }

    fn two_stage(self) -> bool {
        matches!(self, Strategy::PromptThenGating | Strategy::GatingThenPrompt)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown strategy `{s}`; expected one of P, G, P&G, P->G, G->P, IterPG"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub k: usize,
    pub gamma: f64,
    pub lambda_pn: f64,
    pub lr: f64,
    pub batch_size: usize,
    /// Upper bound on first-stage epochs for two-stage strategies.
    pub stage1_max_epochs: usize,
    /// Epochs of the final stage; single-stage strategies run
    /// `stage1_max_epochs + epochs` in total.
    pub epochs: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub tau0: f64,
    pub tau_decay: f64,
    pub tau_min: f64,
    pub gating_hidden: usize,
    pub gating_layers: usize,
    pub dropout: f64,
    /// First stage ends once the epoch-mean loss varies by less than
    /// `convergence_tol` over `convergence_window` epochs.
    pub convergence_window: usize,
    pub convergence_tol: f64,
    pub workers: usize,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            k: 16,
            gamma: 2.0,
            lambda_pn: 0.3,
            lr: 1e-3,
            batch_size: 64,
            stage1_max_epochs: 60,
            epochs: 40,
            strategy: Strategy::PromptThenGating,
            seed: 0,
            tau0: 1.0,
            tau_decay: 0.97,
            tau_min: 0.1,
            gating_hidden: 64,
            gating_layers: 2,
            dropout: 0.1,
            convergence_window: 10,
            convergence_tol: 0.05,
            workers: 1,
        }
    }
}

impl TuneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.k == 0 {
            return bad("K must be at least 1".into());
        }
        if self.gamma.is_nan() || self.gamma <= 1.0 {
            return bad(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if self.lambda_pn.is_nan() || self.lambda_pn < 0.0 {
            return bad(format!("lambda_pn must be non-negative, got {}", self.lambda_pn));
        }
        if !(self.lr > 0.0) || self.batch_size == 0 {
            return bad("lr and batch_size must be positive".into());
        }
        if !(self.tau0 > 0.0 && self.tau_min > 0.0 && self.tau_decay > 0.0) {
            return bad("temperature parameters must be positive".into());
        }
        if self.strategy.two_stage() && (self.stage1_max_epochs == 0 || self.epochs == 0) {
            return bad(format!("strategy {} needs epochs in both stages", self.strategy));
        }
        if self.stage1_max_epochs + self.epochs == 0 {
            return bad("no training epochs configured".into());
        }
        if self.convergence_window < 2 {
            return bad("convergence_window must be at least 2".into());
        }
        Ok(())
    }

    /// Annealed temperature at (0-based) epoch `t` of gated training.
    pub fn tau(&self, t: usize) -> f64 {
        (self.tau0 * self.tau_decay.powi(t as i32)).max(self.tau_min)
    }
}

/// Which parameters one epoch updates and how gates behave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Phase {
    train_bank: bool,
    train_gating: bool,
    gated: bool,
}

const P_OPEN: Phase = Phase {
    train_bank: true,
    train_gating: false,
    gated: false,
};
const P_GATED: Phase = Phase {
    train_bank: true,
    train_gating: false,
    gated: true,
};
const G: Phase = Phase {
    train_bank: false,
    train_gating: true,
    gated: true,
};
const PG: Phase = Phase {
    train_bank: true,
    train_gating: true,
    gated: true,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub stage: usize,
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_f1: f64,
    pub mean_active_paths_pos: f64,
    pub mean_active_paths_neg: f64,
    #[serde(rename = "τ")]
    pub tau: f64,
}

#[derive(Debug, Clone)]
pub struct Tuned {
    /// Head from the best validation epoch of the final stage.
    pub head: L3Head,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

impl Tuned {
    /// History as JSON lines.
    pub fn history_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.history {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Pairs per tape; gradients of chunks are summed in chunk order, so the
/// result does not depend on the number of workers.
const CHUNK: usize = 16;

struct Batch<'a> {
    pairs: Vec<(&'a [f64], &'a [f64])>,
    targets: Vec<f64>,
    interacts: Vec<bool>,
}

fn batch_of<'a>(features: &'a NodeFeatures, pairs: &[&LabeledPair], n_out: usize) -> Batch<'a> {
    Batch {
        pairs: pairs.iter().map(|p| (features.row(p.u), features.row(p.v))).collect(),
        targets: pairs.iter().flat_map(|p| p.label.target(n_out)).collect(),
        interacts: pairs.iter().map(|p| p.label.interacts()).collect(),
    }
}

struct Trainer<'a> {
    cfg: &'a TuneConfig,
    features: &'a NodeFeatures,
    head: L3Head,
    bank_adam: AdamState,
    gating_adam: AdamState,
    pool: Option<rayon::ThreadPool>,
    step: u64,
}

#[derive(Debug, Clone, Copy)]
struct ValStats {
    loss: f64,
    f1: f64,
    active_pos: f64,
    active_neg: f64,
}

impl Trainer<'_> {
    /// Loss and gradients of one chunk, scaled by `weight`.
    fn chunk_grads(
        &self,
        batch: &Batch<'_>,
        range: std::ops::Range<usize>,
        phase: Phase,
        tau: f64,
        noise: &[f64],
        weight: f64,
        dropout_index: u64,
    ) -> Result<(f64, Vec<Tensor>, Vec<Tensor>)> {
        let head = &self.head;
        let (k, n_out) = (head.k(), head.out_dim());
        let mut tape = Tape::new();
        let bank = head.bank.params.bind(&mut tape, phase.train_bank);
        let gating = head.gating.params.bind(&mut tape, phase.train_gating);
        let surrogate = head.surrogate.params.bind(&mut tape, false);
        let gates = if phase.gated {
            Gates::Relaxed {
                tau,
                noise: &noise[range.start * k..range.end * k],
            }
        } else {
            Gates::Open
        };
        let mut dropout = Dropout::new(self.cfg.dropout, rng::substream(self.cfg.seed, rng::DROPOUT, dropout_index))?;
        let f = head.forward(
            &mut tape,
            &bank,
            &gating,
            &surrogate,
            &batch.pairs[range.clone()],
            gates,
            Some(&mut dropout),
        )?;
        let y = tape.constant(Tensor::new(
            range.len(),
            n_out,
            batch.targets[range.start * n_out..range.end * n_out].to_vec(),
        )?);
        let mut loss = loss_bce(&mut tape, f.probs, y)?;
        if let (Some(p), true) = (f.gate_p, self.cfg.lambda_pn > 0.0) {
            let pn = loss_pn(&mut tape, p, &batch.interacts[range], k, self.cfg.gamma)?;
            let pn = tape.scale(pn, self.cfg.lambda_pn);
            loss = tape.add(loss, pn)?;
        }
        let loss = tape.scale(loss, weight);
        let value = tape.value(loss).item();
        if !value.is_finite() {
            return Err(Error::Training("non-finite tuning loss".into()));
        }
        tape.backward(loss)?;
        let gb = if phase.train_bank {
            head.bank.params.grads(&tape, &bank)
        } else {
            Vec::new()
        };
        let gg = if phase.train_gating {
            head.gating.params.grads(&tape, &gating)
        } else {
            Vec::new()
        };
        Ok((value, gb, gg))
    }

    /// One optimizer step on a batch; returns its loss.
    fn step(&mut self, batch: &Batch<'_>, phase: Phase, tau: f64, noise: &[f64]) -> Result<f64> {
        let n = batch.pairs.len();
        let ranges: Vec<_> = (0..n).step_by(CHUNK).map(|s| s..(s + CHUNK).min(n)).collect();
        let base = self.step * 1024;
        let run = |(i, r): (usize, &std::ops::Range<usize>)| {
            self.chunk_grads(batch, r.clone(), phase, tau, noise, r.len() as f64 / n as f64, base + i as u64)
        };
        let parts: Vec<Result<_>> = match &self.pool {
            Some(pool) => pool.install(|| ranges.par_iter().enumerate().map(run).collect()),
            None => ranges.iter().enumerate().map(run).collect(),
        };
        let mut loss = 0.0;
        let mut gb: Option<Vec<Tensor>> = None;
        let mut gg: Option<Vec<Tensor>> = None;
        for part in parts {
            let (l, b, g) = part?;
            loss += l;
            accumulate(&mut gb, b);
            accumulate(&mut gg, g);
        }
        if let Some(g) = gb {
            self.bank_adam.step(&mut self.head.bank.params, &g)?;
        }
        if let Some(g) = gg {
            self.gating_adam.step(&mut self.head.gating.params, &g)?;
        }
        self.step += 1;
        Ok(loss)
    }

    fn validate(&self, val: &[LabeledPair], gated: bool) -> Result<ValStats> {
        let mut head = self.head.clone();
        head.gates_enabled = gated;
        let refs: Vec<&LabeledPair> = val.iter().collect();
        let b = batch_of(self.features, &refs, head.out_dim());
        let pred = head.predict(&b.pairs)?;
        let loss = bce_mean(pred.probs.data(), &b.targets)?;
        let f1 = micro_f1(pred.probs.data(), &b.targets, 0.5)?;
        let active = pred.active_paths(head.k());
        let mean = |want: bool| {
            let xs: Vec<f64> = active
                .iter()
                .zip(&b.interacts)
                .filter(|(_, &y)| y == want)
                .map(|(&a, _)| a as f64)
                .collect();
            if xs.is_empty() {
                f64::NAN
            } else {
                xs.iter().sum::<f64>() / xs.len() as f64
            }
        };
        Ok(ValStats {
            loss,
            f1,
            active_pos: mean(true),
            active_neg: mean(false),
        })
    }
}

fn accumulate(acc: &mut Option<Vec<Tensor>>, g: Vec<Tensor>) {
    if g.is_empty() {
        return;
    }
    match acc {
        Some(a) => add_grads(a, &g),
        None => *acc = Some(g),
    }
}

/// Epoch schedule of a strategy: (stage, phase, is the stage run until
/// convergence, epoch budget).
fn schedule(cfg: &TuneConfig) -> Vec<(usize, Option<Phase>, bool, usize)> {
    let total = cfg.stage1_max_epochs + cfg.epochs;
    match cfg.strategy {
        Strategy::PromptOnly => vec![(1, Some(P_OPEN), false, total)],
        Strategy::GatingOnly => vec![(1, Some(G), false, total)],
        Strategy::Joint => vec![(1, Some(PG), false, total)],
        Strategy::PromptThenGating => vec![(1, Some(P_OPEN), true, cfg.stage1_max_epochs), (2, Some(PG), false, cfg.epochs)],
        Strategy::GatingThenPrompt => vec![(1, Some(G), true, cfg.stage1_max_epochs), (2, Some(PG), false, cfg.epochs)],
        // Alternation is resolved per epoch.
        Strategy::Iterative => vec![(1, None, false, total)],
    }
}

fn converged(losses: &[f64], window: usize, tol: f64) -> bool {
    if losses.len() < window {
        return false;
    }
    let w = &losses[losses.len() - window..];
    let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    hi - lo < tol
}

/// Tunes the prompt bank and gating network of `head` on `train`, keeping
/// the surrogate frozen. The returned head is the one with the best
/// validation micro-F1 (ties: lower validation loss) within the final
/// stage.
pub fn tune(
    head: L3Head,
    features: &NodeFeatures,
    train: &[LabeledPair],
    val: &[LabeledPair],
    cfg: &TuneConfig,
) -> Result<Tuned> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training set is empty".into()));
    }
    if val.is_empty() {
        return Err(Error::Empty("validation set is empty".into()));
    }
    if head.k() != cfg.k {
        return Err(Error::InvalidArgument(format!(
            "head has K = {} but the config asks for {}",
            head.k(),
            cfg.k
        )));
    }
    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let adam = AdamConfig::with_lr(cfg.lr);
    let mut t = Trainer {
        cfg,
        features,
        bank_adam: AdamState::new(&head.bank.params, adam),
        gating_adam: AdamState::new(&head.gating.params, adam),
        head,
        pool,
        step: 0,
    };
    let uses_gates = cfg.strategy != Strategy::PromptOnly;
    let n_out = t.head.out_dim();
    let mut order: Vec<&LabeledPair> = train.iter().collect();
    let mut history = Vec::new();
    let mut epoch = 0usize;
    let mut gated_epochs = 0usize;
    let mut best: Option<(f64, f64, usize, ParamSet, ParamSet)> = None;
    let plan = schedule(cfg);
    let final_stage = plan.last().map_or(1, |s| s.0);

    for (stage, phase, until_converged, budget) in plan {
        let mut losses = Vec::new();
        for local in 0..budget {
            epoch += 1;
            let phase = phase.unwrap_or(if local % 2 == 0 { P_GATED } else { G });
            let tau = if phase.gated { cfg.tau(gated_epochs) } else { 1.0 };
            order.shuffle(&mut rng::substream(cfg.seed, "tune-order", epoch as u64));
            let mut noise_rng = rng::substream(cfg.seed, rng::GUMBEL, epoch as u64);
            let mut total = 0.0;
            let mut n_batches = 0usize;
            for chunk in order.chunks(cfg.batch_size) {
                let batch = batch_of(features, chunk, n_out);
                let noise: Vec<f64> = if phase.gated {
                    (0..chunk.len() * cfg.k).map(|_| logistic_noise(&mut noise_rng)).collect()
                } else {
                    Vec::new()
                };
                total += t.step(&batch, phase, tau, &noise)?;
                n_batches += 1;
            }
            if phase.gated {
                gated_epochs += 1;
            }
            let train_loss = total / n_batches as f64;
            losses.push(train_loss);
            let gated_eval = uses_gates && (phase.gated || stage == final_stage);
            let v = t.validate(val, gated_eval)?;
            history.push(EpochRecord {
                stage,
                epoch,
                train_loss,
                val_loss: v.loss,
                val_f1: v.f1,
                mean_active_paths_pos: v.active_pos,
                mean_active_paths_neg: v.active_neg,
                tau,
            });
            if stage == final_stage {
                let better = match &best {
                    None => true,
                    Some((f1, loss, ..)) => v.f1 > *f1 || (v.f1 == *f1 && v.loss < *loss),
                };
                if better {
                    best = Some((v.f1, v.loss, epoch, t.head.bank.params.clone(), t.head.gating.params.clone()));
                }
            }
            if until_converged && converged(&losses, cfg.convergence_window, cfg.convergence_tol) {
                break;
            }
        }
    }
    let (_, _, best_epoch, bank, gating) =
        best.ok_or_else(|| Error::Training("final stage ran no epochs".into()))?;
    let mut head = t.head;
    head.bank.params = bank;
    head.gating.params = gating;
    head.gates_enabled = uses_gates;
    Ok(Tuned {
        head,
        best_epoch,
        history,
    })
}
