//! Parameter containers and the dense layers built from them.

use rand::Rng as _;

use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Named, ordered collection of parameter tensors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: Tensor) -> usize {
        self.names.push(name.into());
        self.tensors.push(value);
        self.tensors.len() - 1
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, i: usize) -> &Tensor {
        &self.tensors[i]
    }

    pub fn n_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// Puts every tensor on `tape`, differentiable when `trainable`.
    pub fn bind(&self, tape: &mut Tape, trainable: bool) -> Vec<Var> {
        self.tensors
            .iter()
            .map(|t| {
                if trainable {
                    tape.leaf(t.clone())
                } else {
                    tape.constant(t.clone())
                }
            })
            .collect()
    }

    /// Gradients of bound parameters after a backward pass; parameters the
    /// loss did not reach get zeros.
    pub fn grads(&self, tape: &Tape, bound: &[Var]) -> Vec<Tensor> {
        self.tensors
            .iter()
            .zip(bound)
            .map(|(t, &v)| {
                tape.grad(v)
                    .cloned()
                    .unwrap_or_else(|| Tensor::zeros(t.rows(), t.cols()))
            })
            .collect()
    }

    /// `(prefix.name, tensor)` pairs, for checkpoints.
    pub fn named(&self, prefix: &str) -> Vec<(String, Tensor)> {
        self.names
            .iter()
            .zip(&self.tensors)
            .map(|(n, t)| (format!("{prefix}.{n}"), t.clone()))
            .collect()
    }

    /// Replaces all tensors, checking names and shapes.
    pub fn load_from(&mut self, named: &[(String, Tensor)]) -> Result<()> {
        if named.len() != self.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                self.len(),
                named.len()
            )));
        }
        for ((name, t), (own_name, own)) in named.iter().zip(self.names.iter().zip(&mut self.tensors)) {
            if name != own_name || t.shape() != own.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor `{name}` {:?} does not match `{own_name}` {:?}",
                    t.shape(),
                    own.shape()
                )));
            }
            *own = t.clone();
        }
        Ok(())
    }
}

/// Sums gradient lists elementwise, in order.
pub fn add_grads(acc: &mut [Tensor], other: &[Tensor]) {
    for (a, b) in acc.iter_mut().zip(other) {
        a.add_assign(b);
    }
}

/// Multiplies every gradient entry by `c`.
pub fn scale_grads(grads: &mut [Tensor], c: f64) {
    for g in grads {
        for x in g.data_mut() {
            *x *= c;
        }
    }
}

pub fn zero_grads(params: &ParamSet) -> Vec<Tensor> {
    params
        .tensors()
        .iter()
        .map(|t| Tensor::zeros(t.rows(), t.cols()))
        .collect()
}

/// Glorot-uniform weight matrix.
pub fn glorot(rows: usize, cols: usize, rng: &mut Rng) -> Tensor {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-a..a)).collect();
    Tensor::new(rows, cols, data).expect("sized")
}

/// Inverted dropout with its own random stream; `None` rate disables it.
pub struct Dropout {
    rate: f64,
    rng: Rng,
}

impl Dropout {
    pub fn new(rate: f64, rng: Rng) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidArgument(format!("dropout rate {rate} not in [0, 1)")));
        }
        Ok(Self { rate, rng })
    }

    pub fn apply(&mut self, tape: &mut Tape, x: Var) -> Result<Var> {
        if self.rate == 0.0 {
            return Ok(x);
        }
        let (r, c) = tape.shape(x);
        let keep = 1.0 - self.rate;
        let mask: Vec<f64> = (0..r * c)
            .map(|_| if self.rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect();
        let m = tape.constant(Tensor::new(r, c, mask)?);
        tape.mul(x, m)
    }
}

/// Layout of a multilayer perceptron inside a [`ParamSet`]: linear layers
/// with ReLU between them and none after the last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    dims: Vec<usize>,
    offset: usize,
}

impl Mlp {
    /// Appends weights for `dims[0] -> dims[1] -> ... -> dims[last]`. With
    /// `zero_last`, the final layer starts at zero.
    pub fn build(params: &mut ParamSet, prefix: &str, dims: &[usize], zero_last: bool, rng: &mut Rng) -> Self {
        assert!(dims.len() >= 2, "an MLP needs at least one layer");
        let offset = params.len();
        let n_layers = dims.len() - 1;
        for l in 0..n_layers {
            let w = if zero_last && l + 1 == n_layers {
                Tensor::zeros(dims[l], dims[l + 1])
            } else {
                glorot(dims[l], dims[l + 1], rng)
            };
            params.push(format!("{prefix}.{l}.weight"), w);
            params.push(format!("{prefix}.{l}.bias"), Tensor::zeros(1, dims[l + 1]));
        }
        Self {
            dims: dims.to_vec(),
            offset,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        2 * (self.dims.len() - 1)
    }

    pub fn forward(&self, tape: &mut Tape, bound: &[Var], x: Var, mut dropout: Option<&mut Dropout>) -> Result<Var> {
        let n_layers = self.dims.len() - 1;
        let mut h = x;
        for l in 0..n_layers {
            let w = bound[self.offset + 2 * l];
            let b = bound[self.offset + 2 * l + 1];
            let z = tape.matmul(h, w)?;
            h = tape.add_row(z, b)?;
            if l + 1 < n_layers {
                h = tape.relu(h);
                if let Some(d) = dropout.as_deref_mut() {
                    h = d.apply(tape, h)?;
                }
            }
        }
        Ok(h)
    }
}
