//! Subcommand bodies: load inputs, run a pipeline stage, write artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use l3ppi::autodiff::Checkpoint;
use l3ppi::gin::{GinConfig, Surrogate};
use l3ppi::graph::{convert_string_actions, load_embeddings, load_network, parse_network, Mode, NodeFeatures, PpiNetwork};
use l3ppi::prompt::L3Head;
use l3ppi::split::{Category, SplitSpec};
use l3ppi::synth::protein_id;
use l3ppi::trainer::{EpochRecord, Strategy};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{lookup, Config};
use crate::pipeline;
use crate::CliError;

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    write(dir, name, text)
}

fn network(cfg: &Config) -> Result<PpiNetwork, CliError> {
    let path = cfg.required("net")?;
    match cfg.str("net_format") {
        "tsv" => Ok(load_network(path, pipeline::mode(cfg)?)?),
        "string" => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read {path}: {e}")))?;
            Ok(parse_network(&convert_string_actions(&text)?, Mode::Multilabel)?)
        }
        other => Err(CliError::Config(format!("`net_format` must be tsv or string, got `{other}`"))),
    }
}

fn features(cfg: &Config, net: &PpiNetwork) -> Result<NodeFeatures, CliError> {
    Ok(load_embeddings(cfg.required("emb")?)?.aligned(net)?)
}

fn load_split(cfg: &Config, net: &PpiNetwork) -> Result<SplitSpec, CliError> {
    Ok(SplitSpec::load(net, cfg.required("split")?)?)
}

/// Config entries whose key starts with `prefix`, plus the seed.
fn section(cfg: &Config, prefix: &str) -> Value {
    let mut m: serde_json::Map<String, Value> = cfg
        .values()
        .iter()
        .filter(|(k, _)| k.starts_with(prefix))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    m.insert("seed".into(), Value::from(cfg.u64("seed")));
    Value::Object(m)
}

pub fn surrogate_checkpoint(s: &Surrogate, run: Value) -> Checkpoint {
    Checkpoint {
        manifest: json!({ "surrogate": s.gin.config(), "run": run }),
        tensors: s.params.named("surrogate"),
    }
}

pub fn load_surrogate(path: &str) -> Result<Surrogate, CliError> {
    let ck = Checkpoint::load(path)?;
    let config: GinConfig = ck
        .manifest
        .get("surrogate")
        .cloned()
        .ok_or_else(|| CliError::Data(format!("{path} is not a surrogate checkpoint")))
        .and_then(|v| serde_json::from_value(v).map_err(|e| CliError::Data(format!("{path}: {e}"))))?;
    Ok(Surrogate::from_named(config, &ck.group("surrogate"))?)
}

pub fn synth(cfg: &Config, dir: &Path) -> Result<(), CliError> {
    let s = pipeline::run_synth(cfg)?;
    s.network.save(dir.join("network.tsv"))?;
    s.embeddings.save(dir.join("embeddings.emb"))?;
    let proteins: Vec<Value> = (0..s.truth.shape.len())
        .map(|i| json!({ "id": protein_id(i), "shape": s.truth.shape[i], "convex": s.truth.convex[i] }))
        .collect();
    let heldout: Vec<Value> = s
        .truth
        .heldout
        .iter()
        .map(|&(u, v, y)| json!({ "u": protein_id(u), "v": protein_id(v), "interacts": y }))
        .collect();
    write_json(dir, "truth.json", &json!({ "proteins": proteins, "heldout": heldout }))?;
    let edges = s.network.edges();
    let complementary = edges.iter().filter(|&&(u, v)| s.truth.complementary(u, v)).count();
    write_json(
        dir,
        "metrics.json",
        &json!({
            "proteins": s.network.len(),
            "edges": edges.len(),
            "complementary_edges": complementary,
            "dim": s.embeddings.dim(),
            "heldout_positive": s.truth.heldout.iter().filter(|h| h.2).count(),
            "heldout_negative": s.truth.heldout.iter().filter(|h| !h.2).count(),
        }),
    )
}

pub fn validate_l3(cfg: &Config, dir: &Path) -> Result<(), CliError> {
    let net = network(cfg)?;
    if cfg.optional("emb").is_some() {
        features(cfg, &net)?;
    }
    let report = pipeline::run_census(&net, cfg)?;
    write(dir, "l3_summary.csv", report.summary_csv())?;
    write(dir, "census.csv", report.census_csv(&net))?;
    write_json(dir, "metrics.json", &json!({ "pairs": report.census.len(), "rows": report.rows }))
}

fn fold_counts(pairs: &[l3ppi::split::LabeledPair]) -> Value {
    let pos = pairs.iter().filter(|p| p.label.interacts()).count();
    json!({ "pairs": pairs.len(), "interacting": pos, "non_interacting": pairs.len() - pos })
}

pub fn split(cfg: &Config, dir: &Path) -> Result<(), CliError> {
    let net = network(cfg)?;
    let spec = pipeline::run_split(&net, cfg)?;
    spec.save(&net, dir, "split")?;
    let mut categories: BTreeMap<&str, usize> = Category::ALL.iter().map(|c| (c.tag(), 0)).collect();
    for c in spec.categorize() {
        *categories.get_mut(c.tag()).expect("all tags present") += 1;
    }
    write_json(
        dir,
        "metrics.json",
        &json!({
            "summary": spec.summary(),
            "train": fold_counts(&spec.train),
            "val": fold_counts(&spec.val),
            "test": fold_counts(&spec.test),
            "test_categories": categories,
        }),
    )
}

pub fn pretrain(cfg: &Config, dir: &Path) -> Result<(), CliError> {
    let net = network(cfg)?;
    let feats = features(cfg, &net)?;
    let split = match cfg.optional("split") {
        Some(_) => Some(load_split(cfg, &net)?),
        None => None,
    };
    let (pre, data) = pipeline::run_pretrain(&net, &feats, split.as_ref(), cfg)?;
    surrogate_checkpoint(&pre.surrogate, section(cfg, "pretrain.")).save(dir.join("surrogate.ckpt"))?;
    let mut history = String::new();
    for r in &pre.history {
        let _ = writeln!(history, "{}", serde_json::to_string(r).map_err(|e| CliError::Runtime(e.to_string()))?);
    }
    write(dir, "history.jsonl", history)?;
    let best = pre.history.iter().find(|r| r.epoch == pre.best_epoch);
    write_json(
        dir,
        "metrics.json",
        &json!({ "data": data, "best_epoch": pre.best_epoch, "best": best, "epochs": pre.history.len() - 1 }),
    )
}

fn best_record(history: &[EpochRecord], best_epoch: usize) -> Option<&EpochRecord> {
    history.iter().rev().find(|r| r.epoch == best_epoch)
}

pub fn tune(cfg: &Config, dir: &Path) -> Result<(), CliError> {
    let net = network(cfg)?;
    let feats = features(cfg, &net)?;
    let split = load_split(cfg, &net)?;
    let surrogate = load_surrogate(cfg.required("surrogate")?)?;
    let tuned = pipeline::run_tune(surrogate, &feats, &split, cfg)?;
    tuned.head.to_checkpoint(section(cfg, "tune.")).save(dir.join("head.ckpt"))?;
    write(dir, "history.jsonl", tuned.history_jsonl()?)?;
    write_json(
        dir,
        "metrics.json",
        &json!({
            "best_epoch": tuned.best_epoch,
            "best": best_record(&tuned.history, tuned.best_epoch),
            "history": tuned.history,
        }),
    )
}

pub fn eval(cfg: &Config, dir: &Path) -> Result<(), CliError> {
    let net = network(cfg)?;
    let feats = features(cfg, &net)?;
    let split = load_split(cfg, &net)?;
    let head = L3Head::from_checkpoint(&Checkpoint::load(cfg.required("head")?)?)?;
    let ev = pipeline::run_eval(&head, &net, &feats, &split)?;
    write(dir, "inferred_vs_actual.csv", ev.scatter.scatter_csv(&net))?;
    write_json(dir, "metrics.json", &ev)
}

/// One run of an ablation grid.
#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub run: usize,
    pub strategy: String,
    pub key: Option<String>,
    pub value: Option<Value>,
    pub best_epoch: usize,
    pub val_f1: Option<f64>,
    pub test_f1: f64,
    pub bs_f1: Option<f64>,
    pub es_f1: Option<f64>,
    pub ns_f1: Option<f64>,
    pub rho: Option<f64>,
    pub mean_active_pos: f64,
    pub mean_active_neg: f64,
}

/// Parses `key=v1,v2,...` into a registered tuning key and its values.
pub fn parse_sweep(spec: &str) -> Result<(&'static str, Vec<String>), CliError> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("sweep `{spec}` must look like KEY=v1,v2")))?;
    let key = lookup(name.trim())
        .or_else(|| lookup(&format!("tune.{}", name.trim())))
        .filter(|k| k.name.starts_with("tune."))
        .ok_or_else(|| CliError::Config(format!("sweep key `{name}` is not a tune.* key")))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(CliError::Config(format!("sweep `{spec}` lists no values")));
    }
    Ok((key.name, values))
}

/// Strategy and config of every run in the grid, in run order.
pub fn ablation_grid(cfg: &Config) -> Result<Vec<(Config, Option<(&'static str, Value)>)>, CliError> {
    let sweep = cfg.optional("ablate.sweep").map(parse_sweep).transpose()?;
    let strategies: Vec<String> = match cfg.optional("ablate.strategies") {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None if sweep.is_some() => vec![cfg.str("tune.strategy").to_string()],
        None => Strategy::ALL.iter().map(|s| s.name().to_string()).collect(),
    };
    let mut grid = Vec::new();
    for s in &strategies {
        let mut base = cfg.clone();
        base.set("tune.strategy", s)?;
        pipeline::tune_config(&base)?;
        match &sweep {
            None => grid.push((base, None)),
            Some((key, values)) => {
                for v in values {
                    let mut c = base.clone();
                    c.set(key, v)?;
                    pipeline::tune_config(&c)?;
                    let value = c.values()[*key].clone();
                    grid.push((c, Some((*key, value))));
                }
            }
        }
    }
    Ok(grid)
}

pub fn ablate(cfg: &Config, dir: &Path) -> Result<(), CliError> {
    let grid = ablation_grid(cfg)?;
    let net = network(cfg)?;
    let feats = features(cfg, &net)?;
    let split = load_split(cfg, &net)?;
    let surrogate = load_surrogate(cfg.required("surrogate")?)?;
    let mut rows = Vec::with_capacity(grid.len());
    for (i, (run_cfg, swept)) in grid.iter().enumerate() {
        let tuned = pipeline::run_tune(surrogate.clone(), &feats, &split, run_cfg)?;
        let ev = pipeline::run_eval(&tuned.head, &net, &feats, &split)?;
        let run_dir = dir.join(format!("run-{i:02}"));
        std::fs::create_dir_all(&run_dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", run_dir.display())))?;
        write(&run_dir, "history.jsonl", tuned.history_jsonl()?)?;
        let cat = |tag: &str| ev.test.categories.get(tag).and_then(|c| c.as_ref()).map(|c| c.f1);
        rows.push(AblationRow {
            run: i,
            strategy: run_cfg.str("tune.strategy").to_string(),
            key: swept.as_ref().map(|(k, _)| k.to_string()),
            value: swept.as_ref().map(|(_, v)| v.clone()),
            best_epoch: tuned.best_epoch,
            val_f1: best_record(&tuned.history, tuned.best_epoch).map(|r| r.val_f1),
            test_f1: ev.test.f1,
            bs_f1: cat("BS"),
            es_f1: cat("ES"),
            ns_f1: cat("NS"),
            rho: ev.inferred_vs_actual.rho,
            mean_active_pos: ev.inferred_vs_actual.mean_active_pos,
            mean_active_neg: ev.inferred_vs_actual.mean_active_neg,
        });
    }
    write(dir, "ablation.csv", ablation_csv(&rows))?;
    write_json(dir, "metrics.json", &json!({ "runs": rows }))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("run,strategy,key,value,best_epoch,val_f1,test_f1,bs_f1,es_f1,ns_f1,rho,mean_active_pos,mean_active_neg\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.strategy,
            r.key.as_deref().unwrap_or(""),
            r.value.as_ref().map_or_else(String::new, |v| v.to_string()),
            r.best_epoch,
            opt(r.val_f1),
            r.test_f1,
            opt(r.bs_f1),
            opt(r.es_f1),
            opt(r.ns_f1),
            opt(r.rho),
            r.mean_active_pos,
            r.mean_active_neg
        );
    }
    out
}
