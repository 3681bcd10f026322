//! Dynamic reverse-mode tape over [`Tensor`] values.
//!
//! A tape is built fresh for every forward pass. Each operation appends a
//! node holding its value and the handles of its inputs; [`Tape::backward`]
//! walks the nodes in reverse and accumulates vector-Jacobian products.
//! Nodes that do not depend on any differentiable leaf are skipped.

use std::rc::Rc;

use super::tensor::{gemm_acc, gemm_nt_acc, gemm_tn_acc, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Shift(Var),
    Relu(Var),
    Sigmoid(Var),
    Log(Var),
    Clamp(Var, f64, f64),
    Sum(Var),
    Mean(Var),
    ConcatRows(Vec<Var>),
    GatherRows(Var, Rc<[usize]>),
    Aggregate {
        h: Var,
        weights: Var,
        edges: Rc<[(usize, usize)]>,
    },
    SegmentSum(Var, Rc<[usize]>),
    SegmentMax(Var, Vec<usize>),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
}

fn shape_err(op: &'static str, a: &Tensor, b: &Tensor) -> Error {
    Error::Shape {
        op,
        lhs: a.shape(),
        rhs: b.shape(),
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// A differentiable input.
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// A non-differentiable input.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    /// Gradient accumulated by the last [`backward`](Self::backward), if the
    /// node was reached.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.cols() != tb.rows() {
            return Err(shape_err("matmul", ta, tb));
        }
        let (n, k, m) = (ta.rows(), ta.cols(), tb.cols());
        let mut out = Tensor::zeros(n, m);
        gemm_acc(ta.data(), tb.data(), out.data_mut(), n, k, m);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::MatMul(a, b), rg))
    }

    fn zip_same(&mut self, a: Var, b: Var, name: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err(name, ta, tb));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(ta.rows(), ta.cols(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_same(a, b, "add", |x, y| x + y)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Add(a, b), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_same(a, b, "sub", |x, y| x - y)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Sub(a, b), rg))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_same(a, b, "mul", |x, y| x * y)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::Mul(a, b), rg))
    }

    /// Adds the 1 x m row `b` to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if tb.rows() != 1 || tb.cols() != ta.cols() {
            return Err(shape_err("add_row", ta, tb));
        }
        let m = ta.cols();
        let mut out = ta.clone();
        for row in out.data_mut().chunks_mut(m.max(1)) {
            for (o, &bv) in row.iter_mut().zip(tb.data()) {
                *o += bv;
            }
        }
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::AddRow(a, b), rg))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).map(|x| x * c);
        let rg = self.rg(a);
        self.push(out, Op::Scale(a, c), rg)
    }

    /// Adds the constant `c` to every element.
    pub fn shift(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).map(|x| x + c);
        let rg = self.rg(a);
        self.push(out, Op::Shift(a), rg)
    }

    /// `1 - a`.
    pub fn one_minus(&mut self, a: Var) -> Var {
        let neg = self.scale(a, -1.0);
        self.shift(neg, 1.0)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| if x > 0.0 { x } else { 0.0 });
        let rg = self.rg(a);
        self.push(out, Op::Relu(a), rg)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(sigmoid);
        let rg = self.rg(a);
        self.push(out, Op::Sigmoid(a), rg)
    }

    pub fn log(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::ln);
        let rg = self.rg(a);
        self.push(out, Op::Log(a), rg)
    }

    /// Clamps into `[lo, hi]`; the gradient is zero where clamping is active.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let out = self.value(a).map(|x| x.clamp(lo, hi));
        let rg = self.rg(a);
        self.push(out, Op::Clamp(a, lo, hi), rg)
    }

    /// Sum of all elements, as a 1x1 tensor.
    pub fn sum(&mut self, a: Var) -> Var {
        let s: f64 = self.value(a).data().iter().sum();
        let rg = self.rg(a);
        self.push(Tensor::scalar(s), Op::Sum(a), rg)
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let t = self.value(a);
        if t.is_empty() {
            return Err(Error::Empty("mean of an empty tensor".into()));
        }
        let s = t.data().iter().sum::<f64>() / t.len() as f64;
        let rg = self.rg(a);
        Ok(self.push(Tensor::scalar(s), Op::Mean(a), rg))
    }

    /// Stacks tensors with equal column counts on top of each other.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Empty("concat of zero tensors".into()))?;
        let cols = self.value(*first).cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let t = self.value(p);
            if t.cols() != cols {
                return Err(shape_err("concat_rows", self.value(*first), t));
            }
            rows += t.rows();
            data.extend_from_slice(t.data());
        }
        let rg = parts.iter().any(|&p| self.rg(p));
        let out = Tensor::new(rows, cols, data)?;
        Ok(self.push(out, Op::ConcatRows(parts.to_vec()), rg))
    }

    /// Selects rows of `a` by index, repetition allowed.
    pub fn gather_rows(&mut self, a: Var, index: Rc<[usize]>) -> Result<Var> {
        let t = self.value(a);
        let cols = t.cols();
        let mut data = Vec::with_capacity(index.len() * cols);
        for &i in index.iter() {
            if i >= t.rows() {
                return Err(Error::NodeOutOfRange {
                    index: i,
                    len: t.rows(),
                });
            }
            data.extend_from_slice(t.row(i));
        }
        let out = Tensor::new(index.len(), cols, data)?;
        let rg = self.rg(a);
        Ok(self.push(out, Op::GatherRows(a, index), rg))
    }

    /// Weighted neighborhood sum with self term:
    /// `out[i] = h[i] + sum_{e=(i,j) or (j,i)} w[e] * h[j]`.
    ///
    /// `edges` are undirected; `weights` is |E| x 1.
    pub fn aggregate(&mut self, h: Var, weights: Var, edges: Rc<[(usize, usize)]>) -> Result<Var> {
        let (th, tw) = (self.value(h), self.value(weights));
        if tw.shape() != (edges.len(), 1) {
            return Err(Error::Shape {
                op: "aggregate",
                lhs: (edges.len(), 1),
                rhs: tw.shape(),
            });
        }
        let (n, d) = th.shape();
        let mut out = th.clone();
        {
            let od = out.data_mut();
            for (e, &(a, b)) in edges.iter().enumerate() {
                if a >= n || b >= n {
                    return Err(Error::NodeOutOfRange { index: a.max(b), len: n });
                }
                let w = tw.data()[e];
                if w == 0.0 {
                    continue;
                }
                for c in 0..d {
                    od[a * d + c] += w * th.data()[b * d + c];
                    od[b * d + c] += w * th.data()[a * d + c];
                }
            }
        }
        let rg = self.rg(h) || self.rg(weights);
        Ok(self.push(out, Op::Aggregate { h, weights, edges }, rg))
    }

    /// Sums rows into segments: `out[s] = sum_{i: seg[i] = s} a[i]`.
    pub fn segment_sum(&mut self, a: Var, segments: Rc<[usize]>, n_segments: usize) -> Result<Var> {
        let t = self.value(a);
        if segments.len() != t.rows() {
            return Err(Error::DimensionMismatch {
                expected: t.rows(),
                found: segments.len(),
            });
        }
        let cols = t.cols();
        let mut out = Tensor::zeros(n_segments, cols);
        for (i, &s) in segments.iter().enumerate() {
            if s >= n_segments {
                return Err(Error::NodeOutOfRange { index: s, len: n_segments });
            }
            let src = t.row(i);
            let dst = &mut out.data_mut()[s * cols..(s + 1) * cols];
            for (o, &x) in dst.iter_mut().zip(src) {
                *o += x;
            }
        }
        let rg = self.rg(a);
        Ok(self.push(out, Op::SegmentSum(a, segments), rg))
    }

    /// Per-segment maximum of a column vector. Every segment must be
    /// nonempty; the gradient flows to the first maximal entry.
    pub fn segment_max(&mut self, a: Var, segments: &[usize], n_segments: usize) -> Result<Var> {
        let t = self.value(a);
        if t.cols() != 1 || segments.len() != t.rows() {
            return Err(Error::DimensionMismatch {
                expected: t.rows(),
                found: segments.len(),
            });
        }
        let mut best: Vec<Option<usize>> = vec![None; n_segments];
        for (i, &s) in segments.iter().enumerate() {
            if s >= n_segments {
                return Err(Error::NodeOutOfRange { index: s, len: n_segments });
            }
            match best[s] {
                Some(j) if t.data()[j] >= t.data()[i] => {}
                _ => best[s] = Some(i),
            }
        }
        let argmax: Vec<usize> = best
            .into_iter()
            .map(|b| b.ok_or_else(|| Error::Empty("segment_max over an empty segment".into())))
            .collect::<Result<_>>()?;
        let out = Tensor::column(argmax.iter().map(|&i| t.data()[i]).collect());
        let rg = self.rg(a);
        Ok(self.push(out, Op::SegmentMax(a, argmax), rg))
    }

    /// Reverse pass from a scalar root. Gradients of earlier passes are
    /// discarded.
    pub fn backward(&mut self, root: Var) -> Result<()> {
        let shape = self.shape(root);
        if shape != (1, 1) {
            return Err(Error::Shape {
                op: "backward",
                lhs: shape,
                rhs: (1, 1),
            });
        }
        self.grads = (0..self.nodes.len()).map(|_| None).collect();
        self.grads[root.0] = Some(Tensor::scalar(1.0));

        for i in (0..=root.0).rev() {
            if !self.nodes[i].requires_grad {
                continue;
            }
            let Some(g) = self.grads[i].take() else {
                continue;
            };
            self.propagate(i, &g);
            self.grads[i] = Some(g);
        }
        Ok(())
    }

    fn accumulate(&mut self, target: Var, delta: Tensor) {
        if !self.nodes[target.0].requires_grad {
            return;
        }
        match &mut self.grads[target.0] {
            Some(existing) => existing.add_assign(&delta),
            slot @ None => *slot = Some(delta),
        }
    }

    /// Adds `delta` computed lazily only when `target` needs a gradient.
    fn accumulate_with(&mut self, target: Var, delta: impl FnOnce(&Tape) -> Tensor) {
        if self.nodes[target.0].requires_grad {
            let d = delta(self);
            self.accumulate(target, d);
        }
    }

    fn propagate(&mut self, i: usize, g: &Tensor) {
        // Temporarily move the op out so `self` stays borrowable.
        let op = std::mem::replace(&mut self.nodes[i].op, Op::Leaf);
        match &op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (a, b) = (*a, *b);
                self.accumulate_with(a, |t| {
                    let (ta, tb) = (t.value(a), t.value(b));
                    let mut out = Tensor::zeros(ta.rows(), ta.cols());
                    gemm_nt_acc(g.data(), tb.data(), out.data_mut(), g.rows(), g.cols(), tb.rows());
                    out
                });
                self.accumulate_with(b, |t| {
                    let (ta, tb) = (t.value(a), t.value(b));
                    let mut out = Tensor::zeros(tb.rows(), tb.cols());
                    gemm_tn_acc(ta.data(), g.data(), out.data_mut(), ta.rows(), ta.cols(), g.cols());
                    out
                });
            }
            Op::Add(a, b) => {
                self.accumulate(*a, g.clone());
                self.accumulate(*b, g.clone());
            }
            Op::Sub(a, b) => {
                self.accumulate(*a, g.clone());
                self.accumulate(*b, g.map(|x| -x));
            }
            Op::AddRow(a, b) => {
                self.accumulate(*a, g.clone());
                self.accumulate_with(*b, |_| {
                    let m = g.cols();
                    let mut out = Tensor::zeros(1, m);
                    for row in g.data().chunks(m.max(1)) {
                        for (o, &x) in out.data_mut().iter_mut().zip(row) {
                            *o += x;
                        }
                    }
                    out
                });
            }
            Op::Mul(a, b) => {
                let (a, b) = (*a, *b);
                self.accumulate_with(a, |t| zip(g, t.value(b), |x, y| x * y));
                self.accumulate_with(b, |t| zip(g, t.value(a), |x, y| x * y));
            }
            Op::Scale(a, c) => {
                let c = *c;
                self.accumulate(*a, g.map(|x| x * c));
            }
            Op::Shift(a) => self.accumulate(*a, g.clone()),
            Op::Relu(a) => {
                let a = *a;
                self.accumulate_with(a, |t| zip(g, t.value(a), |gx, x| if x > 0.0 { gx } else { 0.0 }));
            }
            Op::Sigmoid(a) => {
                let a = *a;
                let out = &self.nodes[i].value;
                let d = zip(g, out, |gx, s| gx * s * (1.0 - s));
                self.accumulate(a, d);
            }
            Op::Log(a) => {
                let a = *a;
                self.accumulate_with(a, |t| zip(g, t.value(a), |gx, x| gx / x));
            }
            Op::Clamp(a, lo, hi) => {
                let (a, lo, hi) = (*a, *lo, *hi);
                self.accumulate_with(a, |t| {
                    zip(g, t.value(a), |gx, x| if x >= lo && x <= hi { gx } else { 0.0 })
                });
            }
            Op::Sum(a) => {
                let a = *a;
                let gv = g.item();
                self.accumulate_with(a, |t| {
                    let (r, c) = t.shape(a);
                    Tensor::full(r, c, gv)
                });
            }
            Op::Mean(a) => {
                let a = *a;
                let gv = g.item();
                self.accumulate_with(a, |t| {
                    let (r, c) = t.shape(a);
                    Tensor::full(r, c, gv / (r * c) as f64)
                });
            }
            Op::ConcatRows(parts) => {
                let cols = g.cols();
                let mut offset = 0;
                for &p in parts {
                    let rows = self.shape(p).0;
                    let slice = g.data()[offset * cols..(offset + rows) * cols].to_vec();
                    offset += rows;
                    if self.rg(p) {
                        self.accumulate(p, Tensor::new(rows, cols, slice).expect("slice shape"));
                    }
                }
            }
            Op::GatherRows(a, index) => {
                let a = *a;
                self.accumulate_with(a, |t| {
                    let (r, c) = t.shape(a);
                    let mut out = Tensor::zeros(r, c);
                    for (k, &src) in index.iter().enumerate() {
                        let dst = &mut out.data_mut()[src * c..(src + 1) * c];
                        for (o, &x) in dst.iter_mut().zip(g.row(k)) {
                            *o += x;
                        }
                    }
                    out
                });
            }
            Op::Aggregate { h, weights, edges } => {
                let (h, weights) = (*h, *weights);
                self.accumulate_with(h, |t| {
                    let tw = t.value(weights);
                    let d = g.cols();
                    let mut out = g.clone();
                    let od = out.data_mut();
                    for (e, &(a, b)) in edges.iter().enumerate() {
                        let w = tw.data()[e];
                        if w == 0.0 {
                            continue;
                        }
                        for c in 0..d {
                            od[b * d + c] += w * g.data()[a * d + c];
                            od[a * d + c] += w * g.data()[b * d + c];
                        }
                    }
                    out
                });
                self.accumulate_with(weights, |t| {
                    let th = t.value(h);
                    let d = th.cols();
                    let data = edges
                        .iter()
                        .map(|&(a, b)| {
                            let mut s = 0.0;
                            for c in 0..d {
                                s += g.data()[a * d + c] * th.data()[b * d + c]
                                    + g.data()[b * d + c] * th.data()[a * d + c];
                            }
                            s
                        })
                        .collect();
                    Tensor::column(data)
                });
            }
            Op::SegmentSum(a, segments) => {
                let a = *a;
                self.accumulate_with(a, |t| {
                    let (r, c) = t.shape(a);
                    let mut out = Tensor::zeros(r, c);
                    for (row, &s) in segments.iter().enumerate() {
                        out.data_mut()[row * c..(row + 1) * c].copy_from_slice(g.row(s));
                    }
                    out
                });
            }
            Op::SegmentMax(a, argmax) => {
                let a = *a;
                self.accumulate_with(a, |t| {
                    let (r, c) = t.shape(a);
                    let mut out = Tensor::zeros(r, c);
                    for (s, &row) in argmax.iter().enumerate() {
                        out.data_mut()[row] += g.data()[s];
                    }
                    out
                });
            }
        }
        self.nodes[i].op = op;
    }
}

fn zip(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::new(a.rows(), a.cols(), data).expect("matching shapes")
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
