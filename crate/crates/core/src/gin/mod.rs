//! Weighted GIN-0 graph classifier with sum readout, used both as the frozen
//! surrogate that scores L3 patterns and as the path gating network.

mod pretrain;

use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Dropout, Mlp, ParamSet, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::rng;

pub use pretrain::{
    balance_classes, build_pretrain_dataset, pretrain, PretrainConfig, PretrainEpoch, PretrainSample, Pretrained,
};

/// Undirected graph with node features and per-edge weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    features: Tensor,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(features: Tensor, edges: Vec<(usize, usize)>, weights: Vec<f64>) -> Result<Self> {
        let n = features.rows();
        if n == 0 {
            return Err(Error::Empty("graph has no nodes".into()));
        }
        if weights.len() != edges.len() {
            return Err(Error::DimensionMismatch {
                expected: edges.len(),
                found: weights.len(),
            });
        }
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::NodeOutOfRange { index: a.max(b), len: n });
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on node {a}")));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidArgument(format!("edge weight {w} outside [0, 1]")));
        }
        if !features.is_finite() {
            return Err(Error::NonFinite {
                context: "graph node features".into(),
            });
        }
        Ok(Self {
            features,
            edges,
            weights,
        })
    }

    /// All weights 1.
    pub fn unweighted(features: Tensor, edges: Vec<(usize, usize)>) -> Result<Self> {
        let w = vec![1.0; edges.len()];
        Self::new(features, edges, w)
    }

    pub fn n_nodes(&self) -> usize {
        self.features.rows()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same graph with the listed edge positions removed.
    pub fn without_edges(&self, drop: &[usize]) -> Self {
        let (edges, weights) = self
            .edges
            .iter()
            .zip(&self.weights)
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, (&e, &w))| (e, w))
            .unzip();
        Self {
            features: self.features.clone(),
            edges,
            weights,
        }
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_nodes();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let d = self.dim();
        let mut data = vec![0.0; n * d];
        for (i, &p) in perm.iter().enumerate() {
            data[p * d..(p + 1) * d].copy_from_slice(self.features.row(i));
        }
        let edges = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Self::new(Tensor::new(n, d, data)?, edges, self.weights.clone())
    }
}

/// Several graphs laid out block-diagonally for one forward pass.
#[derive(Debug, Clone)]
pub struct GraphBatch {
    pub features: Tensor,
    pub edges: Rc<[(usize, usize)]>,
    pub weights: Tensor,
    /// Graph index of every node.
    pub segments: Rc<[usize]>,
    pub n_graphs: usize,
}

impl GraphBatch {
    pub fn from_graphs<'a>(graphs: impl IntoIterator<Item = &'a WeightedGraph>) -> Result<Self> {
        let mut dim = None;
        let (mut data, mut edges, mut weights, mut segments) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut n_graphs = 0;
        for g in graphs {
            if *dim.get_or_insert(g.dim()) != g.dim() {
                return Err(Error::DimensionMismatch {
                    expected: dim.unwrap_or_default(),
                    found: g.dim(),
                });
            }
            let base = segments.len();
            data.extend_from_slice(g.features.data());
            edges.extend(g.edges.iter().map(|&(a, b)| (a + base, b + base)));
            weights.extend_from_slice(&g.weights);
            segments.extend(std::iter::repeat_n(n_graphs, g.n_nodes()));
            n_graphs += 1;
        }
        let dim = dim.ok_or_else(|| Error::Empty("empty graph batch".into()))?;
        Ok(Self {
            features: Tensor::new(segments.len(), dim, data)?,
            weights: Tensor::column(weights),
            edges: edges.into(),
            segments: segments.into(),
            n_graphs,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GinConfig {
    pub in_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub out_dim: usize,
}

impl GinConfig {
    fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.hidden == 0 || self.layers == 0 || self.out_dim == 0 {
            return Err(Error::InvalidArgument(format!("degenerate GIN shape {self:?}")));
        }
        Ok(())
    }
}

/// Layout of a GIN inside a [`ParamSet`]: `layers` two-layer MLP updates
/// `h <- MLP(h + sum_j w_ij h_j)`, ReLU between layers, sum readout, and a
/// two-layer head whose last layer starts at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Gin {
    config: GinConfig,
    convs: Vec<Mlp>,
    head: Mlp,
}

impl Gin {
    pub fn build(params: &mut ParamSet, config: GinConfig, rng: &mut rng::Rng) -> Result<Self> {
        config.validate()?;
        let mut convs = Vec::with_capacity(config.layers);
        let mut d = config.in_dim;
        for l in 0..config.layers {
            convs.push(Mlp::build(params, &format!("conv{l}"), &[d, config.hidden, config.hidden], false, rng));
            d = config.hidden;
        }
        let head = Mlp::build(params, "head", &[config.hidden, config.hidden, config.out_dim], true, rng);
        Ok(Self { config, convs, head })
    }

    pub fn config(&self) -> GinConfig {
        self.config
    }

    /// Node embeddings after the last layer.
    pub fn node_embeddings(
        &self,
        tape: &mut Tape,
        bound: &[Var],
        x: Var,
        weights: Var,
        edges: &Rc<[(usize, usize)]>,
        mut dropout: Option<&mut Dropout>,
    ) -> Result<Var> {
        let (_, d) = tape.shape(x);
        if d != self.config.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.config.in_dim,
                found: d,
            });
        }
        let mut h = x;
        for (l, conv) in self.convs.iter().enumerate() {
            let agg = tape.aggregate(h, weights, Rc::clone(edges))?;
            h = conv.forward(tape, bound, agg, dropout.as_deref_mut())?;
            if l + 1 < self.convs.len() {
                h = tape.relu(h);
            }
        }
        Ok(h)
    }

    pub fn head_logits(&self, tape: &mut Tape, bound: &[Var], pooled: Var, dropout: Option<&mut Dropout>) -> Result<Var> {
        self.head.forward(tape, bound, pooled, dropout)
    }

    /// Per-graph logits, `n_graphs x out_dim`.
    #[allow(clippy::too_many_arguments)]
    pub fn logits(
        &self,
        tape: &mut Tape,
        bound: &[Var],
        x: Var,
        weights: Var,
        edges: &Rc<[(usize, usize)]>,
        segments: &Rc<[usize]>,
        n_graphs: usize,
        mut dropout: Option<&mut Dropout>,
    ) -> Result<Var> {
        let h = self.node_embeddings(tape, bound, x, weights, edges, dropout.as_deref_mut())?;
        let pooled = readout(tape, h, segments, n_graphs)?;
        self.head_logits(tape, bound, pooled, dropout)
    }

    /// Logits of a prepared batch whose inputs are all constants.
    pub fn batch_logits(
        &self,
        tape: &mut Tape,
        bound: &[Var],
        batch: &GraphBatch,
        dropout: Option<&mut Dropout>,
    ) -> Result<Var> {
        let x = tape.constant(batch.features.clone());
        let w = tape.constant(batch.weights.clone());
        self.logits(tape, bound, x, w, &batch.edges, &batch.segments, batch.n_graphs, dropout)
    }
}

/// Sum pooling of node rows into their graphs.
pub fn readout(tape: &mut Tape, h: Var, segments: &Rc<[usize]>, n_graphs: usize) -> Result<Var> {
    tape.segment_sum(h, Rc::clone(segments), n_graphs)
}

/// A GIN together with its parameters. Once pre-trained it is only ever
/// bound as constants.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub gin: Gin,
    pub params: ParamSet,
}

impl Surrogate {
    pub fn new(config: GinConfig, seed: u64) -> Result<Self> {
        let mut params = ParamSet::new();
        let gin = Gin::build(&mut params, config, &mut rng::stream(seed, rng::INIT))?;
        Ok(Self { gin, params })
    }

    /// Rebuilds from named tensors as produced by [`ParamSet::named`].
    pub fn from_named(config: GinConfig, named: &[(String, Tensor)]) -> Result<Self> {
        let mut s = Self::new(config, 0)?;
        s.params.load_from(named)?;
        Ok(s)
    }

    pub fn out_dim(&self) -> usize {
        self.gin.config().out_dim
    }

    /// Inference-mode probabilities, `n_graphs x out_dim`.
    pub fn predict_batch(&self, batch: &GraphBatch) -> Result<Tensor> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape, false);
        let logits = self.gin.batch_logits(&mut tape, &bound, batch, None)?;
        let p = tape.sigmoid(logits);
        Ok(tape.value(p).clone())
    }

    pub fn predict_graph(&self, g: &WeightedGraph) -> Result<Vec<f64>> {
        Ok(self.predict_batch(&GraphBatch::from_graphs([g])?)?.into_data())
    }
}
