//! Binary cross entropy and the path-number hinge.

use std::rc::Rc;

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::split::Label;

/// Probabilities are clamped into `[BCE_EPS, 1 - BCE_EPS]` before the log.
pub const BCE_EPS: f64 = 1e-7;

/// Elementwise binary cross entropy of one prediction.
pub fn bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean binary cross entropy over every element of `probs` (`B x n`).
pub fn loss_bce(tape: &mut Tape, probs: Var, targets: Var) -> Result<Var> {
    if tape.shape(probs) != tape.shape(targets) {
        return Err(Error::Shape {
            op: "loss_bce",
            lhs: tape.shape(probs),
            rhs: tape.shape(targets),
        });
    }
    let p = tape.clamp(probs, BCE_EPS, 1.0 - BCE_EPS);
    let lp = tape.log(p);
    let q = tape.one_minus(p);
    let lq = tape.log(q);
    let y = targets;
    let ny = tape.one_minus(y);
    let a = tape.mul(y, lp)?;
    let b = tape.mul(ny, lq)?;
    let s = tape.add(a, b)?;
    let m = tape.mean(s)?;
    Ok(tape.scale(m, -1.0))
}

/// Direct evaluation of the mean BCE over aligned slices.
pub fn bce_mean(probs: &[f64], targets: &[f64]) -> Result<f64> {
    if probs.len() != targets.len() || probs.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            found: probs.len(),
        });
    }
    Ok(probs.iter().zip(targets).map(|(&p, &y)| bce(p, y)).sum::<f64>() / probs.len() as f64)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_nan() || gamma <= 1.0 {
        return Err(Error::InvalidArgument(format!("gamma must exceed 1, got {gamma}")));
    }
    Ok(())
}

/// Path-number hinge for one pair: `max(0, K(1 - 1/gamma) - sum p)` when
/// the pair interacts and `max(0, sum p - K/gamma)` otherwise.
pub fn pn_value(p: &[f64], interacts: bool, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let k = p.len() as f64;
    let s: f64 = p.iter().sum();
    Ok(if interacts {
        (k * (1.0 - 1.0 / gamma) - s).max(0.0)
    } else {
        (s - k / gamma).max(0.0)
    })
}

/// Mean path-number hinge over a batch. `gate_p` is `(B K) x 1`, pair-major.
pub fn loss_pn(tape: &mut Tape, gate_p: Var, interacts: &[bool], k: usize, gamma: f64) -> Result<Var> {
    check_gamma(gamma)?;
    let b = interacts.len();
    if tape.shape(gate_p) != (b * k, 1) {
        return Err(Error::Shape {
            op: "loss_pn",
            lhs: tape.shape(gate_p),
            rhs: (b * k, 1),
        });
    }
    let segments: Rc<[usize]> = (0..b * k).map(|j| j / k).collect();
    let sums = tape.segment_sum(gate_p, segments, b)?;
    let kf = k as f64;
    let (sign, offset): (Vec<f64>, Vec<f64>) = interacts
        .iter()
        .map(|&y| if y { (-1.0, kf * (1.0 - 1.0 / gamma)) } else { (1.0, -kf / gamma) })
        .unzip();
    let sign = tape.constant(Tensor::column(sign));
    let offset = tape.constant(Tensor::column(offset));
    let signed = tape.mul(sums, sign)?;
    let shifted = tape.add(signed, offset)?;
    let hinge = tape.relu(shifted);
    tape.mean(hinge)
}

/// 1 when the label denotes an interaction.
pub fn interaction_indicator(label: Label) -> u8 {
    u8::from(label.interacts())
}
