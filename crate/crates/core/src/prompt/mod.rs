//! Prompt patterns: K candidate L3 paths between a query pair built from
//! shared learnable prompt nodes, gated per path and scored by the frozen
//! surrogate.
//!
//! Node order of a pattern is `[u, v, v0, v1, .., vK]`. Edge order is
//! `(v0, v1) .. (v0, vK)`, then the shared edge `(v0, v)`, then
//! `(v1, u) .. (vK, u)`. Path `i` uses edges `i - 1`, `K` and `K + i`.

mod head;

pub use head::{Forward, Gates, L3Head, Prediction};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::autodiff::{glorot, sigmoid, ParamSet, Tensor};
use crate::error::{Error, Result};
use crate::gin::{Gin, GinConfig, GraphBatch, WeightedGraph};
use crate::rng;

/// Gate probabilities are kept inside `[P_MIN, 1 - P_MIN]`.
pub const P_MIN: f64 = 1e-6;
/// Uniform draws for Gumbel noise are kept inside `[U_MIN, 1 - U_MIN]`.
pub const U_MIN: f64 = 1e-10;

/// `K + 1` prompt-node embeddings shared by every query pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBank {
    pub params: ParamSet,
}

impl PromptBank {
    pub fn new(k: usize, dim: usize, seed: u64) -> Result<Self> {
        if k == 0 || dim == 0 {
            return Err(Error::InvalidArgument("prompt bank needs K >= 1 and dim >= 1".into()));
        }
        let mut params = ParamSet::new();
        params.push("prompts", glorot(k + 1, dim, &mut rng::stream(seed, "prompts")));
        Ok(Self { params })
    }

    pub fn from_tensor(prompts: Tensor) -> Result<Self> {
        if prompts.rows() < 2 || prompts.cols() == 0 {
            return Err(Error::InvalidArgument("prompt bank needs K >= 1 and dim >= 1".into()));
        }
        let mut params = ParamSet::new();
        params.push("prompts", prompts);
        Ok(Self { params })
    }

    pub fn k(&self) -> usize {
        self.embeddings().rows() - 1
    }

    pub fn dim(&self) -> usize {
        self.embeddings().cols()
    }

    pub fn embeddings(&self) -> &Tensor {
        self.params.get(0)
    }
}

/// A prompt pattern for one query pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptPattern {
    k: usize,
    graph: WeightedGraph,
}

impl PromptPattern {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// Index of the edge `(v0, v)` shared by every path.
    pub fn shared_edge(&self) -> usize {
        self.k
    }

    /// The two edges that belong to path `i` (1-based) alone.
    pub fn private_edges(&self, i: usize) -> [usize; 2] {
        [i - 1, self.k + i]
    }
}

/// Edge list of a `K`-path pattern in the documented order.
pub fn pattern_edges(k: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(2 * k + 1);
    edges.extend((1..=k).map(|i| (2, 2 + i)));
    edges.push((2, 1));
    edges.extend((1..=k).map(|i| (2 + i, 0)));
    edges
}

/// The pattern for `(u, v)` with every edge at weight 1.
pub fn build_initial_pattern(u_emb: &[f64], v_emb: &[f64], bank: &PromptBank) -> Result<PromptPattern> {
    let d = bank.dim();
    for e in [u_emb, v_emb] {
        if e.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: e.len(),
            });
        }
    }
    let k = bank.k();
    let mut data = Vec::with_capacity((k + 3) * d);
    data.extend_from_slice(u_emb);
    data.extend_from_slice(v_emb);
    data.extend_from_slice(bank.embeddings().data());
    let graph = WeightedGraph::unweighted(Tensor::new(k + 3, d, data)?, pattern_edges(k))?;
    Ok(PromptPattern { k, graph })
}

/// The `K` candidate paths `u - vi - v0 - v`, each as a four-node graph
/// with node order `[u, v, v0, vi]`.
pub fn decompose_paths(pattern: &PromptPattern) -> Vec<WeightedGraph> {
    let f = pattern.graph.features();
    let d = f.cols();
    (1..=pattern.k)
        .map(|i| {
            let mut data = Vec::with_capacity(4 * d);
            for node in [0, 1, 2, 2 + i] {
                data.extend_from_slice(f.row(node));
            }
            WeightedGraph::unweighted(Tensor::new(4, d, data).expect("sized"), PATH_EDGES.to_vec()).expect("valid path")
        })
        .collect()
}

/// Edges of a decomposed path over nodes `[u, v, v0, vi]`.
pub const PATH_EDGES: [(usize, usize); 3] = [(0, 3), (3, 2), (2, 1)];

/// Sets path `i`'s private edges to `g[i-1]` and the shared edge to
/// `max_i g_i`.
pub fn assemble_final(pattern: &PromptPattern, g: &[f64]) -> Result<PromptPattern> {
    if g.len() != pattern.k {
        return Err(Error::DimensionMismatch {
            expected: pattern.k,
            found: g.len(),
        });
    }
    let mut w = vec![0.0; 2 * pattern.k + 1];
    for (i, &gi) in g.iter().enumerate() {
        for e in pattern.private_edges(i + 1) {
            w[e] = gi;
        }
    }
    w[pattern.shared_edge()] = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let graph = WeightedGraph::new(pattern.graph.features().clone(), pattern.graph.edges().to_vec(), w)?;
    Ok(PromptPattern { k: pattern.k, graph })
}

/// Path gating network: a GIN with a single sigmoid output whose final
/// layer starts at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Gating {
    pub gin: Gin,
    pub params: ParamSet,
}

impl Gating {
    pub fn new(dim: usize, hidden: usize, layers: usize, seed: u64) -> Result<Self> {
        let config = GinConfig {
            in_dim: dim,
            hidden,
            layers,
            out_dim: 1,
        };
        Self::with_config(config, seed)
    }

    pub fn with_config(config: GinConfig, seed: u64) -> Result<Self> {
        if config.out_dim != 1 {
            return Err(Error::InvalidArgument("gating network has a single output".into()));
        }
        let mut params = ParamSet::new();
        let gin = Gin::build(&mut params, config, &mut rng::stream(seed, "gating-init"))?;
        Ok(Self { gin, params })
    }
}

/// Inference-mode gate probabilities, clamped to `[P_MIN, 1 - P_MIN]`.
pub fn gate_probs(paths: &[WeightedGraph], gating: &Gating) -> Result<Vec<f64>> {
    let batch = GraphBatch::from_graphs(paths)?;
    let mut tape = crate::autodiff::Tape::new();
    let bound = gating.params.bind(&mut tape, false);
    let logits = gating.gin.batch_logits(&mut tape, &bound, &batch, None)?;
    Ok(tape
        .value(logits)
        .data()
        .iter()
        .map(|&z| sigmoid(z).clamp(P_MIN, 1.0 - P_MIN))
        .collect())
}

/// `eps - eps'` for two independent standard Gumbel draws.
pub fn logistic_noise(r: &mut rng::Rng) -> f64 {
    let mut gumbel = || {
        let u: f64 = r.random::<f64>().clamp(U_MIN, 1.0 - U_MIN);
        -(-u.ln()).ln()
    };
    gumbel() - gumbel()
}

/// Relaxed gate `sigmoid((log p + eps - log(1-p) - eps') / tau)`, with the
/// noise drawn from `noise` when given and zero otherwise.
pub fn gumbel_sigmoid(p: f64, tau: f64, noise: Option<&mut rng::Rng>) -> Result<f64> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {tau}")));
    }
    let p = p.clamp(P_MIN, 1.0 - P_MIN);
    let n = noise.map_or(0.0, logistic_noise);
    Ok(sigmoid((p.ln() - (1.0 - p).ln() + n) / tau))
}

/// Binary inference gate.
pub fn hard_gate(p: f64) -> f64 {
    if p > 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Shape of the gating network and bank, for manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadShape {
    pub k: usize,
    pub dim: usize,
    pub surrogate: GinConfig,
    pub gating: GinConfig,
    pub gates_enabled: bool,
}
