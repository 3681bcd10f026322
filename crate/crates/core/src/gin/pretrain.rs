//! Pre-training data (every L3 path between a pair, labeled by whether the
//! pair interacts) and the minibatch training loop for the surrogate.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{GinConfig, GraphBatch, Surrogate, WeightedGraph};
use crate::autodiff::{AdamConfig, AdamState, Dropout, Tape, Tensor};
use crate::census::PathCounter;
use crate::error::{Error, Result};
use crate::graph::{Mode, NodeFeatures, PpiNetwork};
use crate::rng;
use crate::split::sample_negatives;
use crate::trainer::bce;

/// A four-node L3 path with its pair's label: `[1]`/`[0]` in binary mode,
/// the dense type vector in multilabel mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainSample {
    pub graph: WeightedGraph,
    pub label: Vec<f64>,
}

impl PretrainSample {
    pub fn is_positive(&self) -> bool {
        self.label.iter().any(|&y| y > 0.5)
    }
}

/// Up to `cap` uniformly chosen L3 paths from `u` to `v` (direct edge
/// excluded), by reservoir sampling in enumeration order.
fn reservoir_paths(counter: &mut PathCounter<'_>, u: usize, v: usize, cap: usize, r: &mut rng::Rng) -> Result<Vec<[usize; 4]>> {
    let mut kept: Vec<[usize; 4]> = Vec::new();
    let mut seen = 0usize;
    counter.for_each_path(u, v, 3, true, |p| {
        let path = [p[0], p[1], p[2], p[3]];
        if kept.len() < cap {
            kept.push(path);
        } else {
            let j = r.random_range(0..=seen);
            if j < cap {
                kept[j] = path;
            }
        }
        seen += 1;
    })?;
    Ok(kept)
}

fn path_sample(features: &NodeFeatures, path: [usize; 4], label: Vec<f64>) -> Result<PretrainSample> {
    let d = features.dim();
    let mut data = Vec::with_capacity(4 * d);
    for v in path {
        data.extend_from_slice(features.row(v));
    }
    let graph = WeightedGraph::unweighted(Tensor::new(4, d, data)?, vec![(0, 1), (1, 2), (2, 3)])?;
    Ok(PretrainSample { graph, label })
}

/// L3 paths of every edge of `net` (positives) and of `n_neg_pairs`
/// sampled non-edges (negatives), at most `per_pair_cap` per pair.
///
/// Pair `i` (edges first, in sorted order, then negatives) draws its
/// reservoir from its own sub-stream of `seed`.
pub fn build_pretrain_dataset(
    net: &PpiNetwork,
    features: &NodeFeatures,
    n_neg_pairs: usize,
    per_pair_cap: usize,
    seed: u64,
) -> Result<Vec<PretrainSample>> {
    if per_pair_cap == 0 {
        return Err(Error::InvalidArgument("per_pair_cap must be positive".into()));
    }
    let n_out = match net.mode() {
        Mode::Binary => 1,
        Mode::Multilabel => net.n_types(),
    };
    let mut pairs: Vec<(usize, usize, Vec<f64>)> = net
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let label = match net.mode() {
                Mode::Binary => vec![1.0],
                Mode::Multilabel => net.edge_types(u, v).unwrap_or_default().to_dense(n_out),
            };
            (u, v, label)
        })
        .collect();
    if n_neg_pairs > 0 {
        let negs = sample_negatives(net, n_neg_pairs, &BTreeSet::new(), seed)?;
        pairs.extend(negs.into_iter().map(|(u, v)| (u, v, vec![0.0; n_out])));
    }

    let mut counter = PathCounter::new(net);
    let mut out = Vec::new();
    for (i, (u, v, label)) in pairs.into_iter().enumerate() {
        let mut r = rng::substream(seed, "reservoir", i as u64);
        for path in reservoir_paths(&mut counter, u, v, per_pair_cap, &mut r)? {
            out.push(path_sample(features, path, label.clone())?);
        }
    }
    if out.is_empty() {
        return Err(Error::Empty("no L3 paths found between any pair".into()));
    }
    Ok(out)
}

/// Downsamples the larger of the positive/negative classes to the size of
/// the smaller one. Kept samples retain their relative order.
pub fn balance_classes(samples: Vec<PretrainSample>, seed: u64) -> Vec<PretrainSample> {
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..samples.len()).partition(|&i| samples[i].is_positive());
    let n = pos.len().min(neg.len());
    let mut r = rng::stream(seed, "balance");
    let mut keep: Vec<usize> = Vec::with_capacity(2 * n);
    for mut class in [pos, neg] {
        if class.len() > n {
            class.shuffle(&mut r);
            class.truncate(n);
        }
        keep.extend(class);
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<PretrainSample>> = samples.into_iter().map(Some).collect();
    keep.into_iter().filter_map(|i| slots[i].take()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub hidden: usize,
    pub layers: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub val_fraction: f64,
    pub dropout: f64,
    /// Stop after this many epochs without a new best validation loss;
    /// 0 disables early stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            hidden: 32,
            layers: 2,
            lr: 1e-3,
            batch_size: 64,
            epochs: 100,
            val_fraction: 0.2,
            dropout: 0.1,
            patience: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PretrainEpoch {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone)]
pub struct Pretrained {
    /// Parameters from the epoch with the lowest validation loss.
    pub surrogate: Surrogate,
    pub best_epoch: usize,
    pub history: Vec<PretrainEpoch>,
}

const EVAL_CHUNK: usize = 1024;

/// Mean BCE and elementwise accuracy at threshold 0.5, in inference mode.
fn evaluate(model: &Surrogate, samples: &[&PretrainSample]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let (mut loss, mut correct, mut total) = (0.0, 0usize, 0usize);
    for chunk in samples.chunks(EVAL_CHUNK) {
        let batch = GraphBatch::from_graphs(chunk.iter().map(|s| &s.graph))?;
        let probs = model.predict_batch(&batch)?;
        let targets: Vec<f64> = chunk.iter().flat_map(|s| s.label.iter().copied()).collect();
        for (&p, &y) in probs.data().iter().zip(&targets) {
            loss += bce(p, y);
            correct += usize::from((p > 0.5) == (y > 0.5));
            total += 1;
        }
    }
    Ok((loss / total as f64, correct as f64 / total as f64))
}

/// Minibatch Adam on binary cross entropy. Returns the parameters of the
/// epoch with the lowest validation loss (epoch 0 is the untrained model).
pub fn pretrain(samples: &[PretrainSample], cfg: &PretrainConfig) -> Result<Pretrained> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Empty("pre-training dataset is empty".into()))?;
    let (n_pos, n_neg) = samples.iter().fold((0, 0), |(p, n), s| {
        if s.is_positive() {
            (p + 1, n)
        } else {
            (p, n + 1)
        }
    });
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Training("pre-training dataset has a single class".into()));
    }
    if cfg.batch_size == 0 || !(0.0..1.0).contains(&cfg.val_fraction) {
        return Err(Error::InvalidArgument("batch_size must be positive and val_fraction in [0, 1)".into()));
    }
    let out_dim = first.label.len();
    if samples.iter().any(|s| s.label.len() != out_dim) {
        return Err(Error::InvalidArgument("pre-training labels differ in width".into()));
    }
    let gin = GinConfig {
        in_dim: first.graph.dim(),
        hidden: cfg.hidden,
        layers: cfg.layers,
        out_dim,
    };
    let mut model = Surrogate::new(gin, cfg.seed)?;

    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut rng::stream(cfg.seed, rng::DATA));
    let n_val = (cfg.val_fraction * samples.len() as f64).round() as usize;
    let (val_idx, train_idx) = order.split_at(n_val);
    let val: Vec<&PretrainSample> = val_idx.iter().map(|&i| &samples[i]).collect();
    let mut train: Vec<&PretrainSample> = train_idx.iter().map(|&i| &samples[i]).collect();
    if train.is_empty() {
        return Err(Error::Insufficient("no pre-training samples left for training".into()));
    }

    let mut adam = AdamState::new(&model.params, AdamConfig::with_lr(cfg.lr));
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    let (tl, ta) = evaluate(&model, &train)?;
    let (vl, va) = evaluate(&model, &val)?;
    history.push(PretrainEpoch {
        epoch: 0,
        train_loss: tl,
        train_acc: ta,
        val_loss: vl,
        val_acc: va,
    });
    let score = |e: &PretrainEpoch| if val.is_empty() { e.train_loss } else { e.val_loss };
    let mut best = (score(&history[0]), 0, model.params.clone());

    for epoch in 1..=cfg.epochs {
        train.shuffle(&mut rng::substream(cfg.seed, "pretrain-order", epoch as u64));
        let mut dropout = Dropout::new(cfg.dropout, rng::substream(cfg.seed, rng::DROPOUT, epoch as u64))?;
        for batch_samples in train.chunks(cfg.batch_size) {
            let batch = GraphBatch::from_graphs(batch_samples.iter().map(|s| &s.graph))?;
            let targets: Vec<f64> = batch_samples.iter().flat_map(|s| s.label.iter().copied()).collect();
            let mut tape = Tape::new();
            let bound = model.params.bind(&mut tape, true);
            let logits = model.gin.batch_logits(&mut tape, &bound, &batch, Some(&mut dropout))?;
            let probs = tape.sigmoid(logits);
            let y = tape.constant(Tensor::new(batch_samples.len(), out_dim, targets)?);
            let loss = crate::trainer::loss_bce(&mut tape, probs, y)?;
            if !tape.value(loss).item().is_finite() {
                return Err(Error::Training(format!("non-finite pre-training loss at epoch {epoch}")));
            }
            tape.backward(loss)?;
            let grads = model.params.grads(&tape, &bound);
            adam.step(&mut model.params, &grads)?;
        }
        let (tl, ta) = evaluate(&model, &train)?;
        let (vl, va) = evaluate(&model, &val)?;
        let record = PretrainEpoch {
            epoch,
            train_loss: tl,
            train_acc: ta,
            val_loss: vl,
            val_acc: va,
        };
        if score(&record) < best.0 {
            best = (score(&record), epoch, model.params.clone());
        }
        history.push(record);
        if cfg.patience > 0 && epoch - best.1 >= cfg.patience {
            break;
        }
    }
    model.params = best.2;
    Ok(Pretrained {
        surrogate: model,
        best_epoch: best.1,
        history,
    })
}
