//! The full classification head: prompt bank, gating network and frozen
//! surrogate, evaluated for a batch of query pairs on one tape.

use std::rc::Rc;

use serde_json::json;

use super::{hard_gate, pattern_edges, Gating, HeadShape, PromptBank, PATH_EDGES, P_MIN};
use crate::autodiff::{Checkpoint, Dropout, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::gin::Surrogate;

/// How path gates are produced in a forward pass.
#[derive(Debug, Clone, Copy)]
pub enum Gates<'a> {
    /// Every gate is 1 and the gating network is not evaluated.
    Open,
    /// `sigmoid((logit p + noise) / tau)`, with one logistic noise value
    /// per (pair, path), pair-major.
    Relaxed { tau: f64, noise: &'a [f64] },
    /// `1[p > 0.5]`, no gradient through the gates.
    Hard,
}

#[derive(Debug, Clone, Copy)]
pub struct Forward {
    /// `B x out_dim` interaction probabilities.
    pub probs: Var,
    /// `(B K) x 1` gate probabilities, pair-major; absent for open gates.
    pub gate_p: Option<Var>,
}

#[derive(Debug, Clone)]
pub struct Prediction {
    pub probs: Tensor,
    pub gate_p: Option<Tensor>,
}

impl Prediction {
    /// Number of active paths per pair under binary gates; `K` for every
    /// pair when gates are open.
    pub fn active_paths(&self, k: usize) -> Vec<usize> {
        let n = self.probs.rows();
        match &self.gate_p {
            Some(p) => p.data().chunks(k).map(|c| c.iter().filter(|&&x| x > 0.5).count()).collect(),
            None => vec![k; n],
        }
    }
}

/// Trained head bundle.
#[derive(Debug, Clone)]
pub struct L3Head {
    pub surrogate: Surrogate,
    pub bank: PromptBank,
    pub gating: Gating,
    /// When false, inference keeps every path (the gating network was
    /// never trained).
    pub gates_enabled: bool,
}

const PREDICT_CHUNK: usize = 128;

impl L3Head {
    pub fn new(surrogate: Surrogate, bank: PromptBank, gating: Gating) -> Result<Self> {
        let d = bank.dim();
        if surrogate.gin.config().in_dim != d || gating.gin.config().in_dim != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: surrogate.gin.config().in_dim,
            });
        }
        Ok(Self {
            surrogate,
            bank,
            gating,
            gates_enabled: true,
        })
    }

    pub fn k(&self) -> usize {
        self.bank.k()
    }

    pub fn dim(&self) -> usize {
        self.bank.dim()
    }

    pub fn out_dim(&self) -> usize {
        self.surrogate.out_dim()
    }

    pub fn shape(&self) -> HeadShape {
        HeadShape {
            k: self.k(),
            dim: self.dim(),
            surrogate: self.surrogate.gin.config(),
            gating: self.gating.gin.config(),
            gates_enabled: self.gates_enabled,
        }
    }

    /// Batched forward for `pairs` of (u, v) embeddings.
    #[allow(clippy::too_many_arguments)]
    pub fn forward(
        &self,
        tape: &mut Tape,
        bank: &[Var],
        gating: &[Var],
        surrogate: &[Var],
        pairs: &[(&[f64], &[f64])],
        gates: Gates<'_>,
        dropout: Option<&mut Dropout>,
    ) -> Result<Forward> {
        let (b, k, d) = (pairs.len(), self.k(), self.dim());
        if b == 0 {
            return Err(Error::Empty("no query pairs".into()));
        }
        let mut q = Vec::with_capacity(2 * b * d);
        for &(u, v) in pairs {
            for e in [u, v] {
                if e.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: e.len(),
                    });
                }
                q.extend_from_slice(e);
            }
        }
        let q = tape.constant(Tensor::new(2 * b, d, q)?);
        // Rows: u_0, v_0, u_1, v_1, .., then v0, v1, .., vK.
        let all = tape.concat_rows(&[q, bank[0]])?;
        let prompt = |j: usize| 2 * b + j;

        let (gate_p, g) = match gates {
            Gates::Open => (None, None),
            _ => {
                let mut index = Vec::with_capacity(4 * b * k);
                let mut edges = Vec::with_capacity(3 * b * k);
                let mut segments = Vec::with_capacity(4 * b * k);
                for p in 0..b {
                    for i in 1..=k {
                        let graph = p * k + i - 1;
                        let base = 4 * graph;
                        index.extend([2 * p, 2 * p + 1, prompt(0), prompt(i)]);
                        edges.extend(PATH_EDGES.iter().map(|&(x, y)| (x + base, y + base)));
                        segments.extend([graph; 4]);
                    }
                }
                let x = tape.gather_rows(all, index.into())?;
                let w = tape.constant(Tensor::full(edges.len(), 1, 1.0));
                let edges: Rc<[(usize, usize)]> = edges.into();
                let segments: Rc<[usize]> = segments.into();
                let logits = self.gating.gin.logits(tape, gating, x, w, &edges, &segments, b * k, dropout)?;
                let s = tape.sigmoid(logits);
                let p = tape.clamp(s, P_MIN, 1.0 - P_MIN);
                let g = match gates {
                    Gates::Relaxed { tau, noise } => {
                        if tau.is_nan() || tau <= 0.0 {
                            return Err(Error::InvalidArgument(format!("temperature must be positive, got {tau}")));
                        }
                        if noise.len() != b * k {
                            return Err(Error::DimensionMismatch {
                                expected: b * k,
                                found: noise.len(),
                            });
                        }
                        let lp = tape.log(p);
                        let q = tape.one_minus(p);
                        let lq = tape.log(q);
                        let logit = tape.sub(lp, lq)?;
                        let n = tape.constant(Tensor::column(noise.to_vec()));
                        let z = tape.add(logit, n)?;
                        let z = tape.scale(z, 1.0 / tau);
                        tape.sigmoid(z)
                    }
                    _ => {
                        let hard = tape.value(p).map(hard_gate);
                        tape.constant(hard)
                    }
                };
                (Some(p), Some(g))
            }
        };

        let n = k + 3;
        let local = pattern_edges(k);
        let mut index = Vec::with_capacity(n * b);
        let mut edges = Vec::with_capacity(local.len() * b);
        let mut segments = Vec::with_capacity(n * b);
        for p in 0..b {
            index.extend([2 * p, 2 * p + 1]);
            index.extend((0..=k).map(prompt));
            edges.extend(local.iter().map(|&(x, y)| (x + n * p, y + n * p)));
            segments.extend(std::iter::repeat_n(p, n));
        }
        let x = tape.gather_rows(all, index.into())?;
        let w = match g {
            None => tape.constant(Tensor::full(edges.len(), 1, 1.0)),
            Some(g) => {
                let seg: Vec<usize> = (0..b * k).map(|j| j / k).collect();
                let shared = tape.segment_max(g, &seg, b)?;
                let both = tape.concat_rows(&[g, shared])?;
                let mut widx = Vec::with_capacity(edges.len());
                for p in 0..b {
                    widx.extend((0..k).map(|i| p * k + i));
                    widx.push(b * k + p);
                    widx.extend((0..k).map(|i| p * k + i));
                }
                tape.gather_rows(both, widx.into())?
            }
        };
        let edges: Rc<[(usize, usize)]> = edges.into();
        let segments: Rc<[usize]> = segments.into();
        let logits = self
            .surrogate
            .gin
            .logits(tape, surrogate, x, w, &edges, &segments, b, None)?;
        Ok(Forward {
            probs: tape.sigmoid(logits),
            gate_p,
        })
    }

    /// Deterministic inference: binary gates when enabled, open otherwise.
    pub fn predict(&self, pairs: &[(&[f64], &[f64])]) -> Result<Prediction> {
        let gates = if self.gates_enabled { Gates::Hard } else { Gates::Open };
        let mut probs = Vec::with_capacity(pairs.len() * self.out_dim());
        let mut gate_p = Vec::with_capacity(pairs.len() * self.k());
        for chunk in pairs.chunks(PREDICT_CHUNK) {
            let mut tape = Tape::new();
            let bank = self.bank.params.bind(&mut tape, false);
            let gating = self.gating.params.bind(&mut tape, false);
            let surrogate = self.surrogate.params.bind(&mut tape, false);
            let f = self.forward(&mut tape, &bank, &gating, &surrogate, chunk, gates, None)?;
            probs.extend_from_slice(tape.value(f.probs).data());
            if let Some(p) = f.gate_p {
                gate_p.extend_from_slice(tape.value(p).data());
            }
        }
        let rows = pairs.len();
        Ok(Prediction {
            probs: Tensor::new(rows, self.out_dim(), probs)?,
            gate_p: if self.gates_enabled {
                Some(Tensor::column(gate_p))
            } else {
                None
            },
        })
    }

    /// Gate probabilities for every pair regardless of `gates_enabled`.
    pub fn gate_probabilities(&self, pairs: &[(&[f64], &[f64])]) -> Result<Tensor> {
        let mut out = Vec::with_capacity(pairs.len() * self.k());
        for chunk in pairs.chunks(PREDICT_CHUNK) {
            let mut tape = Tape::new();
            let bank = self.bank.params.bind(&mut tape, false);
            let gating = self.gating.params.bind(&mut tape, false);
            let surrogate = self.surrogate.params.bind(&mut tape, false);
            let f = self.forward(&mut tape, &bank, &gating, &surrogate, chunk, Gates::Hard, None)?;
            out.extend_from_slice(tape.value(f.gate_p.expect("gated forward")).data());
        }
        Ok(Tensor::column(out))
    }

    pub fn to_checkpoint(&self, extra: serde_json::Value) -> Checkpoint {
        let mut tensors = self.surrogate.params.named("surrogate");
        tensors.extend(self.bank.params.named("bank"));
        tensors.extend(self.gating.params.named("gating"));
        Checkpoint {
            manifest: json!({ "head": self.shape(), "run": extra }),
            tensors,
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let shape: HeadShape = serde_json::from_value(
            ck.manifest
                .get("head")
                .cloned()
                .ok_or_else(|| Error::Checkpoint("manifest has no `head` entry".into()))?,
        )?;
        let surrogate = Surrogate::from_named(shape.surrogate, &ck.group("surrogate"))?;
        let mut bank = PromptBank::new(shape.k, shape.dim, 0)?;
        bank.params.load_from(&ck.group("bank"))?;
        let mut gating = Gating::with_config(shape.gating, 0)?;
        gating.params.load_from(&ck.group("gating"))?;
        let mut head = Self::new(surrogate, bank, gating)?;
        head.gates_enabled = shape.gates_enabled;
        Ok(head)
    }
}
