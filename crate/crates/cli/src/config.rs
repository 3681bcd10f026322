//! Flat dotted-key configuration: built-in defaults, then a JSON file,
//! then command-line flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Bool,
    Str,
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub alias: Option<&'static str>,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        alias: None,
        kind,
        default,
        help,
    }
}

const fn aliased(name: &'static str, alias: &'static str, kind: Kind, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        alias: Some(alias),
        kind,
        default,
        help,
    }
}

use Kind::{Bool, Float, Int, Str};

pub const KEYS: &[KeySpec] = &[
    key("seed", Int, "0", "master seed for every random stream"),
    key("workers", Int, "1", "worker threads for census, evaluation and batch gradients"),
    key("mode", Str, "binary", "label mode of the network: binary or multilabel"),
    key("out", Str, "", "output directory (default: $L3PPI_OUT_ROOT/<subcommand>)"),
    key("net", Str, "", "network edge list"),
    key("net_format", Str, "tsv", "tsv, or string for a STRING action export (read as multilabel)"),
    key("emb", Str, "", "protein embedding table"),
    key("split", Str, "", "split TSV written by `split`"),
    key("surrogate", Str, "", "surrogate checkpoint written by `pretrain`"),
    key("head", Str, "", "head checkpoint written by `tune`"),
    key("synth.n", Int, "600", "number of proteins"),
    key("synth.shapes", Int, "12", "shape alphabet size"),
    key("synth.q_hit", Float, "0.4", "edge probability for complementary same-shape pairs"),
    key("synth.q_noise", Float, "0.002", "edge probability for every other pair"),
    key("synth.sigma", Float, "0.1", "embedding noise standard deviation"),
    key("synth.heldout", Int, "0", "edges withheld from the network as held-out positives"),
    aliased("census.kmax", "kmax", Int, "7", "longest path length counted"),
    key("census.n_pos", Int, "500", "sampled interacting pairs"),
    key("census.n_neg", Int, "500", "sampled non-interacting pairs"),
    key("census.clip_quantile", Float, "0.95", "clip counts at this quantile before MI; 0 keeps raw counts"),
    aliased("split.scheme", "scheme", Str, "random", "random, bfs or dfs"),
    aliased("split.t", "t", Int, "6", "traversal roots have degree below t"),
    key("split.test_positives", Int, "0", "test positives for bfs/dfs; 0 means a fifth of the edges"),
    key("pretrain.hidden", Int, "32", "surrogate GIN width"),
    key("pretrain.layers", Int, "2", "surrogate GIN layers"),
    key("pretrain.lr", Float, "0.001", "surrogate learning rate"),
    key("pretrain.batch_size", Int, "64", "surrogate minibatch size"),
    key("pretrain.epochs", Int, "100", "maximum surrogate epochs"),
    key("pretrain.val_fraction", Float, "0.2", "share of samples held out for checkpoint selection"),
    key("pretrain.dropout", Float, "0.1", "surrogate dropout rate"),
    key("pretrain.patience", Int, "20", "stop after this many epochs without improvement; 0 never stops"),
    key("pretrain.per_pair_cap", Int, "100", "L3 paths kept per pair"),
    key("pretrain.neg_pairs", Int, "0", "sampled non-interacting pairs; 0 means four per edge"),
    key("pretrain.balance", Bool, "true", "downsample the larger class"),
    aliased("tune.k", "k", Int, "16", "candidate L3 paths per prompt pattern"),
    key("tune.gamma", Float, "2", "path-number margin, must exceed 1"),
    key("tune.lambda_pn", Float, "0.3", "weight of the path-number loss"),
    key("tune.lr", Float, "0.001", "prompt and gating learning rate"),
    key("tune.batch_size", Int, "64", "pairs per optimizer step"),
    key("tune.stage1_max_epochs", Int, "60", "first-stage epoch cap of two-stage strategies"),
    key("tune.epochs", Int, "40", "final-stage epochs"),
    aliased("tune.strategy", "strategy", Str, "P->G", "P, G, P&G, P->G, G->P or IterPG"),
    key("tune.tau0", Float, "1", "initial gate temperature"),
    key("tune.tau_decay", Float, "0.97", "per-epoch temperature factor"),
    key("tune.tau_min", Float, "0.1", "temperature floor"),
    key("tune.gating_hidden", Int, "64", "gating GIN width"),
    key("tune.gating_layers", Int, "2", "gating GIN layers"),
    key("tune.dropout", Float, "0.1", "gating dropout rate"),
    key("tune.convergence_window", Int, "10", "epochs in the first-stage convergence window"),
    key("tune.convergence_tol", Float, "0.05", "loss range that counts as converged"),
    key("ablate.strategies", Str, "", "comma-separated strategies; empty means all six, or tune.strategy with a sweep"),
    aliased("ablate.sweep", "sweep", Str, "", "one tune key and its values, e.g. K=4,16,64"),
];

fn parse_value(spec: &KeySpec, raw: &str) -> Result<Value, CliError> {
    let bad = || CliError::Config(format!("`{}` expects {:?}, got `{raw}`", spec.name, spec.kind));
    Ok(match spec.kind {
        Int => Value::from(raw.parse::<u64>().map_err(|_| bad())?),
        Float => {
            let x: f64 = raw.parse().map_err(|_| bad())?;
            if !x.is_finite() {
                return Err(bad());
            }
            Value::from(x)
        }
        Bool => Value::from(raw.parse::<bool>().map_err(|_| bad())?),
        Str => Value::from(raw),
    })
}

fn check_value(spec: &KeySpec, v: &Value) -> Result<Value, CliError> {
    let ok = match spec.kind {
        Int => v.as_u64().is_some(),
        Float => v.as_f64().is_some(),
        Bool => v.is_boolean(),
        Str => v.is_string(),
    };
    if !ok {
        return Err(CliError::Config(format!("`{}` expects {:?}, got {v}", spec.name, spec.kind)));
    }
    Ok(match spec.kind {
        Float => Value::from(v.as_f64().expect("checked")),
        _ => v.clone(),
    })
}

pub fn lookup(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter()
        .find(|k| k.name == name)
        .or_else(|| KEYS.iter().find(|k| k.alias.is_some_and(|a| a.eq_ignore_ascii_case(name))))
}

fn unknown(name: &str) -> CliError {
    let valid: Vec<&str> = KEYS.iter().map(|k| k.name).collect();
    CliError::Config(format!("unknown config key `{name}`; valid keys: {}", valid.join(", ")))
}

/// Help text listing every key with its default.
pub fn keys_help() -> String {
    let mut out = String::from("Config keys (set with --<key> <value> or in a JSON file via --config):\n");
    for k in KEYS {
        let name = match k.alias {
            Some(a) => format!("{} (--{a})", k.name),
            None => k.name.to_string(),
        };
        let default = if k.default.is_empty() { "\"\"" } else { k.default };
        let _ = writeln!(out, "  {name:<34} default {default:<8} {}", k.help);
    }
    out.push_str("\nEnvironment: L3PPI_OUT_ROOT sets the default output root (default `runs`).\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, Value>,
}

impl Default for Config {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .map(|k| (k.name.to_string(), parse_value(k, k.default).expect("valid default")))
            .collect();
        Self { values }
    }
}

impl Config {
    /// Applies a flat JSON object of dotted keys.
    pub fn merge_json(&mut self, obj: &Map<String, Value>) -> Result<(), CliError> {
        for (name, v) in obj {
            let spec = KEYS.iter().find(|k| k.name == name).ok_or_else(|| unknown(name))?;
            self.values.insert(spec.name.to_string(), check_value(spec, v)?);
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
        let obj = v
            .as_object()
            .ok_or_else(|| CliError::Config(format!("config {} must be a JSON object", path.display())))?;
        self.merge_json(obj)
    }

    pub fn set(&mut self, name: &str, raw: &str) -> Result<(), CliError> {
        let spec = lookup(name).ok_or_else(|| unknown(name))?;
        self.values.insert(spec.name.to_string(), parse_value(spec, raw)?);
        Ok(())
    }

    /// Applies `--key value` and `--key=value` pairs.
    pub fn apply_flags(&mut self, args: &[String]) -> Result<(), CliError> {
        let mut it = args.iter();
        while let Some(a) = it.next() {
            let flag = a
                .strip_prefix("--")
                .ok_or_else(|| CliError::Config(format!("expected a --key flag, got `{a}`")))?;
            let (name, raw) = match flag.split_once('=') {
                Some((n, v)) => (n, v.to_string()),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| CliError::Config(format!("flag --{flag} needs a value")))?;
                    (flag, v.clone())
                }
            };
            self.set(name, &raw)?;
        }
        Ok(())
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.values.clone().into_iter().collect())
    }

    fn get(&self, name: &str) -> &Value {
        self.values
            .get(name)
            .unwrap_or_else(|| panic!("config key `{name}` is not registered"))
    }

    pub fn u64(&self, name: &str) -> u64 {
        self.get(name).as_u64().expect("integer key")
    }

    pub fn usize(&self, name: &str) -> usize {
        self.u64(name) as usize
    }

    pub fn f64(&self, name: &str) -> f64 {
        self.get(name).as_f64().expect("float key")
    }

    pub fn bool(&self, name: &str) -> bool {
        self.get(name).as_bool().expect("bool key")
    }

    pub fn str(&self, name: &str) -> &str {
        self.get(name).as_str().expect("string key")
    }

    /// A string key that must be set.
    pub fn required(&self, name: &str) -> Result<&str, CliError> {
        match self.str(name) {
            "" => Err(CliError::Config(format!("missing required --{name}"))),
            s => Ok(s),
        }
    }

    pub fn optional(&self, name: &str) -> Option<&str> {
        Some(self.str(name)).filter(|s| !s.is_empty())
    }
}
