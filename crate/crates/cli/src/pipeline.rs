//! Config-driven pipeline stages shared by the subcommands and the
//! acceptance suite.

use std::collections::HashMap;
use std::str::FromStr;

use l3ppi::census::{l3_report, BinSpec, L3Report};
use l3ppi::gin::{balance_classes, build_pretrain_dataset, pretrain, PretrainConfig, Pretrained, Surrogate};
use l3ppi::graph::{Mode, NodeFeatures, PpiNetwork};
use l3ppi::metrics::{eval_split, inferred_vs_actual, EvalReport, InferredVsActual};
use l3ppi::prompt::{Gating, L3Head, PromptBank};
use l3ppi::split::{default_test_positives, split, split_search, Negatives, Scheme, SplitSpec};
use l3ppi::synth::{synth_network, SynthConfig, SynthNetwork};
use l3ppi::trainer::{tune, Strategy, TuneConfig, Tuned};
use serde::Serialize;

use crate::config::Config;
use crate::CliError;

pub fn mode(cfg: &Config) -> Result<Mode, CliError> {
    match cfg.str("mode") {
        "binary" => Ok(Mode::Binary),
        "multilabel" => Ok(Mode::Multilabel),
        other => Err(CliError::Config(format!("`mode` must be binary or multilabel, got `{other}`"))),
    }
}

pub fn synth_config(cfg: &Config) -> SynthConfig {
    SynthConfig {
        n: cfg.usize("synth.n"),
        shapes: cfg.usize("synth.shapes"),
        q_hit: cfg.f64("synth.q_hit"),
        q_noise: cfg.f64("synth.q_noise"),
        sigma: cfg.f64("synth.sigma"),
        heldout: cfg.usize("synth.heldout"),
        seed: cfg.u64("seed"),
    }
}

pub fn run_synth(cfg: &Config) -> Result<SynthNetwork, CliError> {
    let sc = synth_config(cfg);
    sc.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(synth_network(&sc)?)
}

pub fn bin_spec(cfg: &Config) -> Result<BinSpec, CliError> {
    let q = cfg.f64("census.clip_quantile");
    if q == 0.0 {
        Ok(BinSpec::Identity)
    } else if q > 0.0 && q <= 1.0 {
        Ok(BinSpec::ClipQuantile(q))
    } else {
        Err(CliError::Config(format!("census.clip_quantile must lie in [0, 1], got {q}")))
    }
}

pub fn run_census(net: &PpiNetwork, cfg: &Config) -> Result<L3Report, CliError> {
    Ok(l3_report(
        net,
        cfg.usize("census.n_pos"),
        cfg.usize("census.n_neg"),
        cfg.usize("census.kmax"),
        cfg.u64("seed"),
        bin_spec(cfg)?,
        cfg.usize("workers").max(1),
    )?)
}

pub fn run_split(net: &PpiNetwork, cfg: &Config) -> Result<SplitSpec, CliError> {
    let scheme = Scheme::from_str(cfg.str("split.scheme")).map_err(|e| CliError::Config(e.to_string()))?;
    let t = cfg.usize("split.t");
    let seed = cfg.u64("seed");
    let n_test = cfg.usize("split.test_positives");
    let spec = match scheme {
        Scheme::Random => split(net, scheme, t, &Negatives::Sample, seed)?,
        _ => {
            let n = if n_test == 0 { default_test_positives(net) } else { n_test };
            split_search(net, scheme, n, t, &Negatives::Sample, seed)?
        }
    };
    Ok(spec)
}

pub fn pretrain_config(cfg: &Config) -> PretrainConfig {
    PretrainConfig {
        hidden: cfg.usize("pretrain.hidden"),
        layers: cfg.usize("pretrain.layers"),
        lr: cfg.f64("pretrain.lr"),
        batch_size: cfg.usize("pretrain.batch_size"),
        epochs: cfg.usize("pretrain.epochs"),
        val_fraction: cfg.f64("pretrain.val_fraction"),
        dropout: cfg.f64("pretrain.dropout"),
        patience: cfg.usize("pretrain.patience"),
        seed: cfg.u64("seed"),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PretrainData {
    pub network_edges: usize,
    pub samples: usize,
    pub positives: usize,
    pub negatives: usize,
}

/// Pre-trains the surrogate on the L3 paths of `net`, restricted to the
/// interacting training pairs of `split` when one is given so that no
/// validation or test edge leaks into the path samples.
pub fn run_pretrain(
    net: &PpiNetwork,
    features: &NodeFeatures,
    split: Option<&SplitSpec>,
    cfg: &Config,
) -> Result<(Pretrained, PretrainData), CliError> {
    let restricted;
    let source = match split {
        Some(s) => {
            let edges: Vec<_> = s.train.iter().filter(|p| p.label.interacts()).map(|p| p.key()).collect();
            restricted = net.restrict_to(&edges)?;
            &restricted
        }
        None => net,
    };
    let seed = cfg.u64("seed");
    let n_neg = match cfg.usize("pretrain.neg_pairs") {
        0 => 4 * source.edge_count(),
        n => n,
    };
    let mut samples = build_pretrain_dataset(source, features, n_neg, cfg.usize("pretrain.per_pair_cap"), seed)?;
    if cfg.bool("pretrain.balance") {
        samples = balance_classes(samples, seed);
    }
    let positives = samples.iter().filter(|s| s.is_positive()).count();
    let data = PretrainData {
        network_edges: source.edge_count(),
        samples: samples.len(),
        positives,
        negatives: samples.len() - positives,
    };
    Ok((pretrain(&samples, &pretrain_config(cfg))?, data))
}

pub fn tune_config(cfg: &Config) -> Result<TuneConfig, CliError> {
    let strategy = Strategy::from_str(cfg.str("tune.strategy")).map_err(|e| CliError::Config(e.to_string()))?;
    let tc = TuneConfig {
        k: cfg.usize("tune.k"),
        gamma: cfg.f64("tune.gamma"),
        lambda_pn: cfg.f64("tune.lambda_pn"),
        lr: cfg.f64("tune.lr"),
        batch_size: cfg.usize("tune.batch_size"),
        stage1_max_epochs: cfg.usize("tune.stage1_max_epochs"),
        epochs: cfg.usize("tune.epochs"),
        strategy,
        seed: cfg.u64("seed"),
        tau0: cfg.f64("tune.tau0"),
        tau_decay: cfg.f64("tune.tau_decay"),
        tau_min: cfg.f64("tune.tau_min"),
        gating_hidden: cfg.usize("tune.gating_hidden"),
        gating_layers: cfg.usize("tune.gating_layers"),
        dropout: cfg.f64("tune.dropout"),
        convergence_window: cfg.usize("tune.convergence_window"),
        convergence_tol: cfg.f64("tune.convergence_tol"),
        workers: cfg.usize("workers").max(1),
    };
    tc.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(tc)
}

/// Builds a fresh head around `surrogate` and tunes it on `split`.
pub fn run_tune(
    surrogate: Surrogate,
    features: &NodeFeatures,
    split: &SplitSpec,
    cfg: &Config,
) -> Result<Tuned, CliError> {
    let tc = tune_config(cfg)?;
    let d = features.dim();
    let head = L3Head::new(
        surrogate,
        PromptBank::new(tc.k, d, tc.seed)?,
        Gating::new(d, tc.gating_hidden, tc.gating_layers, tc.seed)?,
    )?;
    Ok(tune(head, features, &split.train, &split.val, &tc)?)
}

/// Summary of [`InferredVsActual`] for metric files.
#[derive(Debug, Clone, Serialize)]
pub struct PathAgreement {
    pub k: usize,
    pub rho: Option<f64>,
    pub mean_active_pos: f64,
    pub mean_active_neg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub test: EvalReport,
    pub inferred_vs_actual: PathAgreement,
    #[serde(skip)]
    pub scatter: InferredVsActual,
}

/// Test-fold metrics plus inferred-vs-actual L3 agreement, counting paths
/// in the full network.
pub fn run_eval(head: &L3Head, net: &PpiNetwork, features: &NodeFeatures, split: &SplitSpec) -> Result<Evaluation, CliError> {
    let test = eval_split(head, features, split)?;
    let pairs: Vec<(usize, usize)> = split.test.iter().map(|p| (p.u, p.v)).collect();
    let scatter = inferred_vs_actual(head, net, features, &pairs)?;
    let labels: HashMap<(usize, usize), bool> =
        split.test.iter().map(|p| ((p.u, p.v), p.label.interacts())).collect();
    let interacts = |u: usize, v: usize| labels[&(u, v)];
    let agreement = PathAgreement {
        k: scatter.k,
        rho: scatter.rho.value(),
        mean_active_pos: scatter.mean_inferred(|r| interacts(r.u, r.v)),
        mean_active_neg: scatter.mean_inferred(|r| !interacts(r.u, r.v)),
    };
    Ok(Evaluation {
        test,
        inferred_vs_actual: agreement,
        scatter,
    })
}
