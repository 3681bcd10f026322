//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `L3PPI_ACCEPTANCE_ONLY=1,7` runs a subset. Failures are reported but
//! only turn into a nonzero exit under `L3PPI_ACCEPTANCE_STRICT=1`, so the
//! regular test run records the outcome without hiding the other targets.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use l3ppi::autodiff::{grad_check, ParamSet, Tape, Tensor};
use l3ppi::census::{count_simple_paths, l3_report, BinSpec};
use l3ppi::gin::{pretrain, GinConfig, PretrainConfig, PretrainSample, Surrogate, WeightedGraph};
use l3ppi::graph::PpiNetwork;
use l3ppi::prompt::{
    assemble_final, build_initial_pattern, gumbel_sigmoid, Gates, Gating, L3Head, PromptBank,
};
use l3ppi::rng;
use l3ppi::split::{split, Category, LabeledPair, Negatives, Scheme};
use l3ppi::synth::{synth_network, SynthConfig};
use l3ppi::trainer::{loss_bce, loss_pn};
use l3ppi_cli::config::Config;
use l3ppi_cli::pipeline;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

// ---------------------------------------------------------------- 1

/// Counts simple paths of every length from `u` to `v` by plain recursion
/// over an adjacency matrix.
fn naive_counts(adj: &[Vec<bool>], u: usize, v: usize, k_max: usize) -> Vec<u64> {
    fn walk(adj: &[Vec<bool>], at: usize, v: usize, depth: usize, k_max: usize, used: &mut Vec<bool>, out: &mut [u64]) {
        if at == v {
            out[depth] += 1;
            return;
        }
        if depth == k_max {
            return;
        }
        for next in 0..adj.len() {
            if adj[at][next] && !used[next] {
                used[next] = true;
                walk(adj, next, v, depth + 1, k_max, used, out);
                used[next] = false;
            }
        }
    }
    let mut out = vec![0; k_max + 1];
    let mut used = vec![false; adj.len()];
    used[u] = true;
    walk(adj, u, v, 0, k_max, &mut used, &mut out);
    out
}

fn criterion_1() -> Outcome {
    let mut r = rng::stream(1, "acceptance");
    let mut compared = 0usize;
    for g in 0..200 {
        let n = r.random_range(2..=30usize);
        let p = r.random_range(0.02..(6.0 / n as f64).clamp(0.1, 0.8));
        let mut adj = vec![vec![false; n]; n];
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if r.random::<f64>() < p {
                    adj[a][b] = true;
                    adj[b][a] = true;
                    edges.push((a, b));
                }
            }
        }
        let ids = (0..n).map(|i| format!("n{i}")).collect();
        let net = PpiNetwork::from_edges(ids, &edges).expect("valid graph");
        for _ in 0..5 {
            let u = r.random_range(0..n);
            let v = (u + r.random_range(1..n)) % n;
            let with = naive_counts(&adj, u, v, 7);
            let mut cut = adj.clone();
            cut[u][v] = false;
            cut[v][u] = false;
            let without = naive_counts(&cut, u, v, 7);
            for k in 1..=7 {
                for (exclude, want) in [(false, with[k]), (true, without[k])] {
                    let got = count_simple_paths(&net, u, v, k, exclude).expect("count");
                    if got != want {
                        return outcome(
                            false,
                            format!("graph {g}: ({u},{v}) k={k} exclude={exclude}: {got} vs oracle {want}"),
                        );
                    }
                    compared += 1;
                }
            }
        }
    }
    outcome(true, format!("{compared} counts match the recursive oracle"))
}

// ---------------------------------------------------------------- 2

fn randomize(ps: &mut ParamSet, r: &mut rng::Rng, scale: f64) {
    for t in ps.tensors_mut() {
        for x in t.data_mut() {
            let z: f64 = StandardNormal.sample(r);
            *x = scale * z;
        }
    }
}

fn random_vec(r: &mut rng::Rng, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(r);
            z
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let mut r = rng::stream(2, "acceptance");
    let mut worst: f64 = 0.0;
    let configs = 24;
    for c in 0..configs {
        let k = r.random_range(1..=8usize);
        let d = r.random_range(1..=16usize);
        let hidden = r.random_range(2..=8usize);
        let seed = c as u64;
        let sg = GinConfig {
            in_dim: d,
            hidden,
            layers: r.random_range(1..=2),
            out_dim: 1,
        };
        let mut surrogate = Surrogate::new(sg, seed).expect("surrogate");
        randomize(&mut surrogate.params, &mut r, 0.4);
        let mut gating = Gating::new(d, hidden, r.random_range(1..=2), seed).expect("gating");
        randomize(&mut gating.params, &mut r, 0.4);
        let bank = PromptBank::new(k, d, seed).expect("bank");
        let head = L3Head::new(surrogate, bank, gating).expect("head");
        let n_pairs = r.random_range(1..=3usize);
        let embs: Vec<(Vec<f64>, Vec<f64>)> = (0..n_pairs).map(|_| (random_vec(&mut r, d), random_vec(&mut r, d))).collect();
        let pairs: Vec<(&[f64], &[f64])> = embs.iter().map(|(a, b)| (a.as_slice(), b.as_slice())).collect();
        let noise: Vec<f64> = (0..n_pairs * k).map(|_| r.random_range(-2.0..2.0)).collect();
        let interacts: Vec<bool> = (0..n_pairs).map(|_| r.random()).collect();
        let targets = Tensor::column(interacts.iter().map(|&y| if y { 1.0 } else { 0.0 }).collect());
        let tau = r.random_range(0.5..2.0);
        let checked = grad_check(
            &[&head.bank.params, &head.gating.params, &head.surrogate.params],
            1e-5,
            |t: &mut Tape, b| {
                let f = head.forward(t, &b[0], &b[1], &b[2], &pairs, Gates::Relaxed { tau, noise: &noise }, None)?;
                let y = t.constant(targets.clone());
                let bce = loss_bce(t, f.probs, y)?;
                let pn = loss_pn(t, f.gate_p.expect("gated"), &interacts, k, 2.0)?;
                let pn = t.scale(pn, 0.3);
                t.add(bce, pn)
            },
        );
        match checked {
            Ok(g) => worst = worst.max(g.max_relative_error),
            Err(e) => return outcome(false, format!("config {c}: {e}")),
        }
    }
    outcome(worst < 1e-4, format!("{configs} configurations, max relative error {worst:.2e}"))
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    let defaults: Config = {
        let mut c = Config::default();
        c.merge_file(&workspace_file("configs/synth_default.json")).expect("synth defaults");
        c
    };
    let mut holds = 0;
    let mut lines = Vec::new();
    for seed in 0..10u64 {
        let mut cfg = defaults.clone();
        cfg.set("seed", &seed.to_string()).expect("seed key");
        let s = pipeline::run_synth(&cfg).expect("synth");
        let rep = l3_report(&s.network, 500, 500, 4, seed, BinSpec::default(), 1).expect("census");
        let rho = |k| rep.row(k).and_then(|r| r.pearson.value()).unwrap_or(f64::NAN);
        let mi = |k| rep.row(k).map_or(f64::NAN, |r| r.mi);
        let ok = rho(3) > rho(2) && rho(3) > rho(4) && mi(3) > mi(2) && mi(3) > mi(4);
        holds += usize::from(ok);
        lines.push(format!("{:.2}/{:.2}/{:.2}", rho(2), rho(3), rho(4)));
    }
    outcome(holds >= 8, format!("ordering holds in {holds}/10 seeds; rho2/rho3/rho4 per seed {}", lines.join(" ")))
}

// ---------------------------------------------------------------- 4 and 5

struct SeedRuns {
    seed: u64,
    f1: [f64; 3],
    rho: Option<f64>,
    pos: f64,
    neg: f64,
}

const BENCH_STRATEGIES: [&str; 3] = ["P->G", "P", "G"];

fn benchmark_seed(seed: u64, strategies: &[&str]) -> SeedRuns {
    let mut cfg = Config::default();
    cfg.merge_file(&workspace_file("configs/benchmark.json")).expect("benchmark config");
    cfg.set("seed", &seed.to_string()).expect("seed key");
    let s = pipeline::run_synth(&cfg).expect("synth");
    let feats = s.embeddings.aligned(&s.network).expect("features");
    let sp = pipeline::run_split(&s.network, &cfg).expect("split");
    let (pre, _) = pipeline::run_pretrain(&s.network, &feats, Some(&sp), &cfg).expect("pretrain");
    let mut runs = SeedRuns {
        seed,
        f1: [f64::NAN; 3],
        rho: None,
        pos: f64::NAN,
        neg: f64::NAN,
    };
    for (i, name) in BENCH_STRATEGIES.iter().enumerate() {
        if !strategies.contains(name) {
            continue;
        }
        let mut c = cfg.clone();
        c.set("tune.strategy", name).expect("strategy key");
        let tuned = pipeline::run_tune(pre.surrogate.clone(), &feats, &sp, &c).expect("tune");
        let ev = pipeline::run_eval(&tuned.head, &s.network, &feats, &sp).expect("eval");
        runs.f1[i] = ev.test.f1;
        if *name == "P->G" {
            runs.rho = ev.inferred_vs_actual.rho;
            runs.pos = ev.inferred_vs_actual.mean_active_pos;
            runs.neg = ev.inferred_vs_actual.mean_active_neg;
        }
    }
    runs
}

fn criterion_4(runs: &[SeedRuns]) -> Outcome {
    let rhos: Vec<f64> = runs.iter().map(|r| r.rho.unwrap_or(f64::NAN)).collect();
    let gaps: Vec<f64> = runs.iter().map(|r| r.pos - r.neg).collect();
    let (rho, gap) = (median(rhos.clone()), median(gaps.clone()));
    let per_seed: Vec<String> = runs
        .iter()
        .map(|r| format!("s{}:{:.2}/{:.1}", r.seed, r.rho.unwrap_or(f64::NAN), r.pos - r.neg))
        .collect();
    outcome(
        rho > 0.5 && gap >= 2.0,
        format!("median rho {rho:.3}, median active-path gap {gap:.2}; rho/gap per seed {}", per_seed.join(" ")),
    )
}

fn criterion_5(runs: &[SeedRuns]) -> Outcome {
    let med = |i: usize| median(runs.iter().map(|r| r.f1[i]).collect());
    let (pg, p, g) = (med(0), med(1), med(2));
    outcome(
        pg >= p && p >= g,
        format!("median test micro-F1 P->G {pg:.4}, P {p:.4}, G {g:.4}"),
    )
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let mut r = rng::stream(6, "acceptance");
    let schemes = [Scheme::Random, Scheme::Bfs, Scheme::Dfs];
    for combo in 0..50 {
        let scheme = schemes[combo % 3];
        let seed: u64 = r.random_range(0..1_000_000);
        let n = r.random_range(80..=200usize);
        let shapes = r.random_range(3..=8usize);
        // Mean within-shape degree near 4, so low-degree roots exist.
        let s = synth_network(&SynthConfig {
            n,
            shapes,
            q_hit: (8.0 * shapes as f64 / n as f64).min(1.0),
            q_noise: 0.01,
            seed,
            ..SynthConfig::default()
        })
        .expect("synth");
        let net = &s.network;
        let fail = |what: String| outcome(false, format!("combination {combo} ({scheme}, seed {seed}): {what}"));
        let sp = match split(net, scheme, 6, &Negatives::Sample, seed) {
            Ok(sp) => sp,
            Err(e) => return fail(e.to_string()),
        };
        let mut seen_keys = HashSet::new();
        for p in sp.train.iter().chain(&sp.val).chain(&sp.test) {
            if !seen_keys.insert(p.key()) {
                return fail(format!("pair {:?} appears twice", p.key()));
            }
        }
        let count = |ps: &[LabeledPair]| {
            let pos = ps.iter().filter(|p| p.label.interacts()).count();
            (pos, ps.len() - pos)
        };
        let (tp, tn) = count(&sp.test);
        if tp != tn {
            return fail(format!("test has {tp} positives and {tn} negatives"));
        }
        for p in sp.train.iter().chain(&sp.val).chain(&sp.test) {
            if p.label.interacts() != net.has_edge(p.u, p.v) {
                return fail(format!("pair {:?} mislabeled", p.key()));
            }
        }
        match scheme {
            Scheme::Random => {
                let (trp, trn) = count(&sp.train);
                let (vp, vn) = count(&sp.val);
                for (class, tr, va, te) in [("positive", trp, vp, tp), ("negative", trn, vn, tn)] {
                    let n = (tr + va + te) as f64;
                    if (tr as f64 - 0.6 * n).abs() > 1.0 || (va as f64 - 0.2 * n).abs() > 1.0 {
                        return fail(format!("{class} folds {tr}/{va}/{te} are not 60/20/20"));
                    }
                }
            }
            _ => {
                let Some(root) = sp.root else {
                    return fail("traversal split has no root".into());
                };
                let deg = net.degree(root).expect("root in range");
                if deg > 5 {
                    return fail(format!("root degree {deg} exceeds 5"));
                }
            }
        }
        let train_nodes: BTreeSet<usize> = sp
            .train
            .iter()
            .filter(|p| p.label.interacts())
            .flat_map(|p| [p.u, p.v])
            .collect();
        for (p, c) in sp.test.iter().zip(sp.categorize()) {
            let want = match usize::from(train_nodes.contains(&p.u)) + usize::from(train_nodes.contains(&p.v)) {
                2 => Category::Both,
                1 => Category::Either,
                _ => Category::Neither,
            };
            if c != want {
                return fail(format!("pair {:?} tagged {} but train incidence says {}", p.key(), c.tag(), want.tag()));
            }
        }
    }
    outcome(true, "50 combinations satisfy every invariant")
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let mut r = rng::stream(7, "acceptance");
    for trial in 0..1000 {
        let k = r.random_range(1..=16usize);
        let d = r.random_range(1..=8usize);
        let bank = PromptBank::new(k, d, trial).expect("bank");
        let (u, v) = (random_vec(&mut r, d), random_vec(&mut r, d));
        let pattern = build_initial_pattern(&u, &v, &bank).expect("pattern");
        let g = pattern.graph();
        if g.n_nodes() != k + 3 || g.edges().len() != 2 * k + 1 {
            return outcome(
                false,
                format!("K={k}: {} nodes, {} edges", g.n_nodes(), g.edges().len()),
            );
        }
        // Gate-off equivalence on a subsample: zero gates against deleted edges.
        if trial % 10 != 0 {
            continue;
        }
        let mut surrogate = Surrogate::new(
            GinConfig {
                in_dim: d,
                hidden: 6,
                layers: 2,
                out_dim: 1,
            },
            trial,
        )
        .expect("surrogate");
        randomize(&mut surrogate.params, &mut r, 0.5);
        let gates: Vec<f64> = (0..k).map(|_| if r.random::<bool>() { 1.0 } else { 0.0 }).collect();
        let gated = assemble_final(&pattern, &gates).expect("assemble");
        let mut drop: Vec<usize> = (0..k).filter(|&i| gates[i] == 0.0).flat_map(|i| pattern.private_edges(i + 1)).collect();
        if gates.iter().all(|&x| x == 0.0) {
            drop.push(pattern.shared_edge());
        }
        let deleted: WeightedGraph = pattern.graph().without_edges(&drop);
        let a = surrogate.predict_graph(gated.graph()).expect("predict");
        let b = surrogate.predict_graph(&deleted).expect("predict");
        if a.iter().zip(&b).any(|(x, y)| x.to_bits() != y.to_bits()) {
            return outcome(false, format!("trial {trial}: gated {a:?} vs deleted {b:?}"));
        }
    }
    outcome(true, "1000 patterns have K+3 nodes and 2K+1 edges; 100 gate-off checks bit-exact")
}

// ---------------------------------------------------------------- 8

/// `E[sigmoid(logit p + L)]` for standard logistic `L`, by the midpoint rule.
fn expected_relaxed_gate(p: f64) -> f64 {
    let a = (p / (1.0 - p)).ln();
    let s = |x: f64| 1.0 / (1.0 + (-x).exp());
    let (lo, hi, n) = (-40.0, 40.0, 200_000);
    let h = (hi - lo) / n as f64;
    (0..n)
        .map(|i| {
            let x = lo + (i as f64 + 0.5) * h;
            s(a + x) * s(x) * (1.0 - s(x))
        })
        .sum::<f64>()
        * h
}

fn criterion_8() -> Outcome {
    let mut r = rng::stream(8, "acceptance");
    let n = 100_000;
    let draws: Vec<f64> = (0..n).map(|_| gumbel_sigmoid(0.7, 1.0, Some(&mut r)).expect("tau > 0")).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let above = draws.iter().filter(|&&g| g > 0.5).count() as f64 / n as f64;
    let mut worst: f64 = 0.0;
    for p in [0.1, 0.4, 0.6, 0.9] {
        let g = gumbel_sigmoid(p, 0.05, None).expect("tau > 0");
        let hard = if p > 0.5 { 1.0 } else { 0.0 };
        worst = worst.max((g - hard).abs());
    }
    outcome(
        (0.66..=0.74).contains(&mean) && worst < 1e-3,
        format!(
            "mean g {mean:.4} at p=0.7 (quadrature of the relaxation gives {:.4}; share with g > 0.5 is {above:.4}); max |g - hard| {worst:.2e} at tau=0.05",
            expected_relaxed_gate(0.7)
        ),
    )
}

// ---------------------------------------------------------------- 9

fn path_sample(r: &mut rng::Rng, d: usize, shift: f64, label: f64) -> PretrainSample {
    let mut data = Vec::with_capacity(4 * d);
    for _ in 0..4 {
        for j in 0..d {
            let z: f64 = StandardNormal.sample(r);
            data.push(if j == 0 { z * 0.5 + shift } else { z });
        }
    }
    let features = Tensor::new(4, d, data).expect("sized");
    PretrainSample {
        graph: WeightedGraph::unweighted(features, vec![(0, 1), (1, 2), (2, 3)]).expect("path"),
        label: vec![label],
    }
}

fn criterion_9() -> Outcome {
    let mut r = rng::stream(9, "acceptance");
    let d = 6;
    let separable: Vec<PretrainSample> = (0..400)
        .map(|i| {
            let y = i % 2 == 0;
            path_sample(&mut r, d, if y { 1.5 } else { -1.5 }, if y { 1.0 } else { 0.0 })
        })
        .collect();
    let cfg = PretrainConfig {
        epochs: 200,
        ..PretrainConfig::default()
    };
    let fit = pretrain(&separable, &cfg).expect("pretrain");
    let best_acc = fit.history.iter().map(|e| e.train_acc).fold(0.0, f64::max);

    let shuffled: Vec<PretrainSample> = (0..400)
        .map(|i| path_sample(&mut r, d, 0.0, if i % 2 == 0 { 1.0 } else { 0.0 }))
        .collect();
    let noise = pretrain(&shuffled, &cfg).expect("pretrain");
    let ln2 = std::f64::consts::LN_2;
    let worst = noise
        .history
        .iter()
        .map(|e| (e.val_loss - ln2).abs() / ln2)
        .fold(0.0, f64::max);
    outcome(
        best_acc >= 0.98 && worst <= 0.05,
        format!(
            "separable train accuracy {best_acc:.3} within {} epochs; shuffled val loss deviates at most {:.2}% from ln 2 over {} epochs",
            fit.history.len() - 1,
            100.0 * worst,
            noise.history.len() - 1
        ),
    )
}

// ---------------------------------------------------------------- 10

fn l3ppi(args: &[&str], root: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_l3ppi"))
        .args(args)
        .env("L3PPI_OUT_ROOT", root)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("`l3ppi {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().expect("tempdir");
    let root = tmp.path();
    let p = |rel: &str| root.join(rel).display().to_string();
    let (net, emb, split, sur, head) = (
        p("synth/network.tsv"),
        p("synth/embeddings.emb"),
        p("split/split.tsv"),
        p("pretrain/surrogate.ckpt"),
        p("tune/head.ckpt"),
    );
    let common = ["--workers", "1", "--seed", "5"];
    let steps: Vec<(&str, Vec<&str>)> = vec![
        ("synth", vec!["--synth.n", "80", "--synth.shapes", "4", "--synth.q_hit", "0.4", "--synth.q_noise", "0.01"]),
        ("validate-l3", vec!["--net", &net, "--emb", &emb, "--kmax", "5", "--census.n_pos", "40", "--census.n_neg", "40"]),
        ("split", vec!["--net", &net, "--scheme", "dfs"]),
        ("pretrain", vec!["--net", &net, "--emb", &emb, "--split", &split, "--pretrain.epochs", "5", "--pretrain.per_pair_cap", "4"]),
        (
            "tune",
            vec!["--net", &net, "--emb", &emb, "--split", &split, "--surrogate", &sur, "--k", "4", "--tune.stage1_max_epochs", "3", "--tune.epochs", "3"],
        ),
        ("eval", vec!["--net", &net, "--emb", &emb, "--split", &split, "--head", &head]),
        (
            "ablate",
            vec!["--net", &net, "--emb", &emb, "--split", &split, "--surrogate", &sur, "--sweep", "K=2,4", "--tune.stage1_max_epochs", "2", "--tune.epochs", "2"],
        ),
    ];
    for (sub, args) in &steps {
        let mut all = vec![*sub];
        all.extend(common);
        all.extend(args.iter().copied());
        if let Err(e) = l3ppi(&all, root) {
            return outcome(false, e);
        }
    }
    for (sub, _) in &steps {
        let manifest = root.join(sub).join("manifest.json");
        let again = root.join(format!("{sub}-again"));
        let again_s = again.display().to_string();
        if let Err(e) = l3ppi(&["rerun", &manifest.display().to_string(), "--out", &again_s], root) {
            return outcome(false, e);
        }
        let a = std::fs::read(root.join(sub).join("metrics.json")).expect("metrics");
        let b = std::fs::read(again.join("metrics.json")).expect("rerun metrics");
        if a != b {
            return outcome(false, format!("{sub}: rerun metrics.json differs"));
        }
    }
    outcome(true, format!("{} subcommands rerun from their manifests with byte-identical metrics.json", steps.len()))
}

// ----------------------------------------------------------------

fn report(n: usize, name: &str, limit: Duration, elapsed: Duration, o: &Outcome) -> bool {
    let in_time = elapsed <= limit;
    let pass = o.pass && in_time;
    println!(
        "criterion {n:>2} {name}: {} ({}; {:.1}s of {}s{})",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", over time" }
    );
    pass
}

fn main() {
    let only: Option<BTreeSet<usize>> = std::env::var("L3PPI_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("L3PPI_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let wanted = |n: usize| only.as_ref().is_none_or(|s| s.contains(&n));
    let secs = Duration::from_secs;
    let mut failed = Vec::new();

    let simple: [(usize, &str, u64, fn() -> Outcome); 3] = [
        (1, "path-count oracle", 60, criterion_1),
        (2, "gradient integrity", 120, criterion_2),
        (3, "L3 rule on the default network", 300, criterion_3),
    ];
    for (n, name, limit, f) in simple {
        if wanted(n) {
            let t = Instant::now();
            let o = f();
            if !report(n, name, secs(limit), t.elapsed(), &o) {
                failed.push(n);
            }
        }
    }

    if wanted(4) || wanted(5) {
        let strategies: &[&str] = if wanted(5) { &BENCH_STRATEGIES } else { &["P->G"] };
        // P->G runs (with pre-training) count toward criterion 4; the
        // P-only and G-only runs toward criterion 5 as well.
        let t = Instant::now();
        let mut runs = Vec::new();
        let mut pg_time = Duration::ZERO;
        for seed in 0..10 {
            let s = Instant::now();
            runs.push(benchmark_seed(seed, &["P->G"]));
            pg_time += s.elapsed();
        }
        if strategies.len() > 1 {
            for run in &mut runs {
                let rest = benchmark_seed(run.seed, &["P", "G"]);
                run.f1[1] = rest.f1[1];
                run.f1[2] = rest.f1[2];
            }
        }
        if wanted(4) && !report(4, "path-number regularizer", secs(900), pg_time, &criterion_4(&runs)) {
            failed.push(4);
        }
        if wanted(5) && !report(5, "two-stage ordering", secs(3600), t.elapsed(), &criterion_5(&runs)) {
            failed.push(5);
        }
    }

    let rest: [(usize, &str, u64, fn() -> Outcome); 5] = [
        (6, "split invariants", 60, criterion_6),
        (7, "structural invariants", 30, criterion_7),
        (8, "Gumbel-sigmoid statistics", 10, criterion_8),
        (9, "pre-training sanity", 300, criterion_9),
        (10, "reproducibility", 600, criterion_10),
    ];
    for (n, name, limit, f) in rest {
        if wanted(n) {
            let t = Instant::now();
            let o = f();
            if !report(n, name, secs(limit), t.elapsed(), &o) {
                failed.push(n);
            }
        }
    }

    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        if strict {
            std::process::exit(1);
        }
    }
}
