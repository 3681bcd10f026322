use std::collections::BTreeSet;

use l3ppi::autodiff::{AdamConfig, AdamState, ParamSet, Tape, Tensor};
use l3ppi::census::{census, count_simple_paths};
use l3ppi::gin::{build_pretrain_dataset, GinConfig, Surrogate};
use l3ppi::graph::PpiNetwork;
use l3ppi::metrics::{eval_split, mann_whitney};
use l3ppi::prompt::{Gating, L3Head, PromptBank};
use l3ppi::split::{sample_negatives, split, Negatives, Scheme};
use l3ppi::synth::{synth_network, SynthConfig, SynthNetwork};
use l3ppi::trainer::{tune, Strategy, TuneConfig};

fn small_synth(seed: u64, q_noise: f64) -> SynthNetwork {
    synth_network(&SynthConfig {
        n: 90,
        shapes: 4,
        q_hit: 0.5,
        q_noise,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}

#[test]
fn pretrain_dataset_size_matches_capped_path_counts() {
    let s = small_synth(1, 0.01);
    let feats = s.embeddings.aligned(&s.network).unwrap();
    let (cap, n_neg, seed) = (3, 60, 4);
    let ds = build_pretrain_dataset(&s.network, &feats, n_neg, cap, seed).unwrap();

    let mut pairs: Vec<(usize, usize, bool)> = s.network.edges().into_iter().map(|(u, v)| (u, v, true)).collect();
    let negs = sample_negatives(&s.network, n_neg, &BTreeSet::new(), seed).unwrap();
    pairs.extend(negs.into_iter().map(|(u, v)| (u, v, false)));
    let (mut want_pos, mut want_neg) = (0u64, 0u64);
    for (u, v, y) in pairs {
        let kept = count_simple_paths(&s.network, u, v, 3, true).unwrap().min(cap as u64);
        if y {
            want_pos += kept;
        } else {
            want_neg += kept;
        }
    }
    let pos = ds.iter().filter(|d| d.is_positive()).count() as u64;
    assert_eq!(pos, want_pos);
    assert_eq!(ds.len() as u64 - pos, want_neg);
    for d in &ds {
        assert_eq!(d.graph.n_nodes(), 4);
        assert_eq!(d.graph.edges(), &[(0, 1), (1, 2), (2, 3)]);
    }
}

#[test]
fn l3_counts_of_edges_dominate_non_edges_without_noise() {
    let s = small_synth(2, 0.0);
    let edges = s.network.edges();
    let negs = sample_negatives(&s.network, edges.len(), &BTreeSet::new(), 2).unwrap();
    let pairs: Vec<(usize, usize, u8)> = edges
        .iter()
        .map(|&(u, v)| (u, v, 1))
        .chain(negs.iter().map(|&(u, v)| (u, v, 0)))
        .collect();
    let rows = census(&s.network, &pairs, 3, 1).unwrap();
    let l3 = |y: u8| -> Vec<f64> { rows.iter().filter(|r| r.label == y).map(|r| r.count(3) as f64).collect() };
    let test = mann_whitney(&l3(1), &l3(0)).unwrap();
    assert!(test.p_greater < 0.01, "{test:?}");
}

#[test]
fn adam_minimizes_a_quadratic() {
    let mut params = ParamSet::new();
    params.push("p", Tensor::scalar(0.0));
    let mut adam = AdamState::new(&params, AdamConfig::with_lr(0.1));
    for _ in 0..500 {
        let mut t = Tape::new();
        let b = params.bind(&mut t, true);
        let d = t.shift(b[0], -3.0);
        let sq = t.mul(d, d).unwrap();
        let loss = t.sum(sq);
        t.backward(loss).unwrap();
        let g = params.grads(&t, &b);
        adam.step(&mut params, &g).unwrap();
    }
    assert!((params.get(0).data()[0] - 3.0).abs() < 1e-3);
}

fn tiny_head(dim: usize, k: usize) -> L3Head {
    let sg = GinConfig {
        in_dim: dim,
        hidden: 8,
        layers: 1,
        out_dim: 1,
    };
    L3Head::new(
        Surrogate::new(sg, 3).unwrap(),
        PromptBank::new(k, dim, 3).unwrap(),
        Gating::new(dim, 8, 1, 3).unwrap(),
    )
    .unwrap()
}

fn tiny_config(strategy: Strategy, workers: usize) -> TuneConfig {
    TuneConfig {
        k: 3,
        strategy,
        stage1_max_epochs: 2,
        epochs: 2,
        batch_size: 40,
        gating_hidden: 8,
        gating_layers: 1,
        workers,
        ..TuneConfig::default()
    }
}

#[test]
fn tuning_is_independent_of_worker_count() {
    let s = small_synth(3, 0.01);
    let feats = s.embeddings.aligned(&s.network).unwrap();
    let sp = split(&s.network, Scheme::Random, 6, &Negatives::Sample, 3).unwrap();
    for strategy in [Strategy::PromptThenGating, Strategy::Iterative] {
        let one = tune(tiny_head(feats.dim(), 3), &feats, &sp.train, &sp.val, &tiny_config(strategy, 1)).unwrap();
        let two = tune(tiny_head(feats.dim(), 3), &feats, &sp.train, &sp.val, &tiny_config(strategy, 2)).unwrap();
        assert_eq!(one.history_jsonl().unwrap(), two.history_jsonl().unwrap());
        assert_eq!(one.head.bank.embeddings(), two.head.bank.embeddings());
    }
}

#[test]
fn tuned_head_survives_a_checkpoint_round_trip() {
    let s = small_synth(4, 0.01);
    let feats = s.embeddings.aligned(&s.network).unwrap();
    let sp = split(&s.network, Scheme::Random, 6, &Negatives::Sample, 4).unwrap();
    let tuned = tune(tiny_head(feats.dim(), 3), &feats, &sp.train, &sp.val, &tiny_config(Strategy::PromptThenGating, 1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("head.ckpt");
    tuned.head.to_checkpoint(serde_json::json!({})).save(&path).unwrap();
    let back = L3Head::from_checkpoint(&l3ppi::autodiff::Checkpoint::load(&path).unwrap()).unwrap();
    let a = eval_split(&tuned.head, &feats, &sp).unwrap();
    let b = eval_split(&back, &feats, &sp).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn restricting_to_training_edges_drops_held_out_paths() {
    let s = small_synth(5, 0.01);
    let sp = split(&s.network, Scheme::Random, 6, &Negatives::Sample, 5).unwrap();
    let train: Vec<_> = sp.train.iter().filter(|p| p.label.interacts()).map(|p| p.key()).collect();
    let restricted: PpiNetwork = s.network.restrict_to(&train).unwrap();
    assert_eq!(restricted.edge_count(), train.len());
    for p in sp.test.iter().filter(|p| p.label.interacts()) {
        assert!(!restricted.has_edge(p.u, p.v));
    }
}
